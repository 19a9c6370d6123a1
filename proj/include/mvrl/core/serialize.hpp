#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvrl/nn/tensor.hpp"

namespace mvrl {

// Little-endian binary stream with a strict record order; readers must
// consume exactly what writers produced (names are verified on read).
class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : f_(path, std::ios::binary) {
    if (!f_) throw std::runtime_error("cannot open for write: " + path);
  }

  void u8(uint8_t v) { raw(&v, 1); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void i64(int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }

  void str(const std::string& s) {
    u32(uint32_t(s.size()));
    raw(s.data(), s.size());
  }

  void bytes(const std::vector<uint8_t>& b) {
    u64(b.size());
    raw(b.data(), b.size());
  }

  template <class S>
  void tensor(const std::string& name, const nn::MatX<S>& m) {
    str(name);
    u32(uint32_t(m.rows()));
    u32(uint32_t(m.cols()));
    u8(sizeof(S) == 4 ? 0 : 1);
    raw(m.data(), sizeof(S) * size_t(m.size()));
  }

  void raw(const void* p, size_t n) { f_.write(static_cast<const char*>(p), std::streamsize(n)); }

  bool good() const { return bool(f_); }

 private:
  std::ofstream f_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : f_(path, std::ios::binary) {
    if (!f_) throw std::runtime_error("cannot open for read: " + path);
  }

  uint8_t u8() { return get<uint8_t>(); }
  uint32_t u32() { return get<uint32_t>(); }
  uint64_t u64() { return get<uint64_t>(); }
  int64_t i64() { return get<int64_t>(); }
  double f64() { return get<double>(); }

  std::string str() {
    const uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  std::vector<uint8_t> bytes() {
    const uint64_t n = u64();
    std::vector<uint8_t> b(n);
    raw(b.data(), n);
    return b;
  }

  template <class S>
  void tensor(const std::string& expected_name, nn::MatX<S>& m) {
    const std::string name = str();
    if (name != expected_name)
      throw std::runtime_error("checkpoint record mismatch: expected " + expected_name + ", got " +
                               name);
    const uint32_t rows = u32();
    const uint32_t cols = u32();
    const uint8_t dtype = u8();
    if (dtype != (sizeof(S) == 4 ? 0 : 1))
      throw std::runtime_error("checkpoint dtype mismatch at " + name);
    m.resize(rows, cols);
    raw(m.data(), sizeof(S) * size_t(m.size()));
  }

  void raw(void* p, size_t n) {
    f_.read(static_cast<char*>(p), std::streamsize(n));
    if (!f_) throw std::runtime_error("unexpected end of checkpoint stream");
  }

  bool eof_next() { return f_.peek() == std::char_traits<char>::eof(); }

 private:
  template <class T>
  T get() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::ifstream f_;
};

}  // namespace mvrl
