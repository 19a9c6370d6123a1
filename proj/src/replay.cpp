#include "mvrl/agent/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace mvrl::agent {

ReplayBuffer::ReplayBuffer(size_t capacity_transitions, int n_step, int frame_stack)
    : capacity_(capacity_transitions), n_step_(n_step), frame_stack_(frame_stack) {
  if (n_step < 1) throw std::invalid_argument("replay: n_step must be >= 1");
}

void ReplayBuffer::add_episode(Episode ep) {
  const size_t t = ep.transitions();
  if (t == 0) return;
  if (ep.fixed_frames.size() != t + 1 || ep.moving_frames.size() != t + 1 ||
      ep.rewards.size() != t || ep.discounts.size() != t)
    throw std::invalid_argument("replay: inconsistent episode arrays");
  ep.id = next_id_++;
  transitions_ += t;
  episodes_.push_back(std::move(ep));
  while (transitions_ > capacity_ && episodes_.size() > 1) {
    transitions_ -= episodes_.front().transitions();
    episodes_.pop_front();
  }
}

size_t ReplayBuffer::valid_windows() const {
  size_t n = 0;
  for (const auto& ep : episodes_) {
    const size_t t = ep.transitions();
    if (t >= size_t(n_step_)) n += t - n_step_ + 1;
  }
  return n;
}

sim::FrameStack ReplayBuffer::stack_at(const Episode& ep, bool moving, int t) const {
  const auto& frames = moving ? ep.moving_frames : ep.fixed_frames;
  sim::FrameStack st;
  st.frames.reserve(size_t(frame_stack_));
  for (int off = frame_stack_ - 1; off >= 0; --off)
    st.frames.push_back(frames[size_t(std::max(0, t - off))]);
  return st;
}

SampledBatch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  const size_t windows = valid_windows();
  if (windows == 0) throw std::runtime_error("replay: no complete n-step window available");

  SampledBatch b;
  b.fixed_t.reserve(batch_size);
  for (int k = 0; k < batch_size; ++k) {
    size_t pick = size_t(rng.uniform_int(0, int64_t(windows) - 1));
    const Episode* ep = nullptr;
    int start = 0;
    for (const auto& e : episodes_) {
      const size_t t = e.transitions();
      if (t < size_t(n_step_)) continue;
      const size_t w = t - n_step_ + 1;
      if (pick < w) {
        ep = &e;
        start = int(pick);
        break;
      }
      pick -= w;
    }
    if (!ep) throw std::logic_error("replay: window selection out of range");

    b.fixed_t.push_back(stack_at(*ep, false, start));
    b.moving_t.push_back(stack_at(*ep, true, start));
    b.fixed_tn.push_back(stack_at(*ep, false, start + n_step_));
    b.moving_tn.push_back(stack_at(*ep, true, start + n_step_));
    b.actions.push_back(ep->actions[size_t(start)]);
    b.reward_windows.emplace_back(ep->rewards.begin() + start,
                                  ep->rewards.begin() + start + n_step_);
    b.discount_windows.emplace_back(ep->discounts.begin() + start,
                                    ep->discounts.begin() + start + n_step_);
    b.episode_ids.push_back(ep->id);
    b.start_indices.push_back(start);
  }
  return b;
}

namespace {

void save_frames(BinWriter& w, const std::vector<Image8>& frames) {
  w.u32(uint32_t(frames.size()));
  if (frames.empty()) return;
  w.u32(uint32_t(frames[0].width));
  w.u32(uint32_t(frames[0].height));
  w.u32(uint32_t(frames[0].channels));
  std::vector<uint8_t> blob;
  blob.reserve(frames.size() * frames[0].size());
  for (const auto& f : frames) blob.insert(blob.end(), f.data.begin(), f.data.end());
  w.bytes(zlib_compress(blob.data(), blob.size(), 3));
}

}  // namespace

void ReplayBuffer::save(BinWriter& w) const {
  w.u64(0x4d56524c42554631ull);  // "MVRLBUF1"
  w.u32(uint32_t(episodes_.size()));
  w.i64(next_id_);
  for (const auto& ep : episodes_) {
    w.i64(ep.id);
    w.u8(ep.success ? 1 : 0);
    const uint32_t t = uint32_t(ep.transitions());
    w.u32(t);
    save_frames(w, ep.fixed_frames);
    save_frames(w, ep.moving_frames);
    w.u32(uint32_t(ep.actions.empty() ? 0 : ep.actions[0].size()));
    for (const auto& a : ep.actions) w.raw(a.data(), sizeof(float) * size_t(a.size()));
    for (double x : ep.rewards) w.f64(x);
    for (double x : ep.discounts) w.f64(x);
  }
}

void ReplayBuffer::load(BinReader& r) {
  if (r.u64() != 0x4d56524c42554631ull) throw std::runtime_error("replay: bad buffer file magic");
  const uint32_t n_eps = r.u32();
  next_id_ = r.i64();
  episodes_.clear();
  transitions_ = 0;
  for (uint32_t i = 0; i < n_eps; ++i) {
    Episode ep;
    ep.id = r.i64();
    ep.success = r.u8() != 0;
    const uint32_t t = r.u32();
    for (auto* frames : {&ep.fixed_frames, &ep.moving_frames}) {
      const uint32_t nf = r.u32();
      if (nf > 0) {
        const int wdt = int(r.u32()), hgt = int(r.u32()), ch = int(r.u32());
        const size_t each = size_t(wdt) * hgt * ch;
        const std::vector<uint8_t> comp = r.bytes();
        const std::vector<uint8_t> blob = zlib_decompress(comp.data(), comp.size(), each * nf);
        if (blob.size() != each * nf) throw std::runtime_error("replay: frame blob size mismatch");
        frames->resize(nf);
        for (uint32_t k = 0; k < nf; ++k) {
          (*frames)[k] = Image8(wdt, hgt, ch);
          std::copy_n(blob.begin() + k * each, each, (*frames)[k].data.begin());
        }
      }
    }
    const uint32_t adim = r.u32();
    ep.actions.resize(t);
    for (auto& a : ep.actions) {
      a.resize(adim);
      r.raw(a.data(), sizeof(float) * adim);
    }
    ep.rewards.resize(t);
    for (auto& x : ep.rewards) x = r.f64();
    ep.discounts.resize(t);
    for (auto& x : ep.discounts) x = r.f64();
    transitions_ += t;
    episodes_.push_back(std::move(ep));
  }
}

}  // namespace mvrl::agent
