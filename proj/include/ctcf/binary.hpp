// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <utility>

#include "ctcf/error.hpp"

namespace ctcf::binary {

class Writer {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string context) : data_(data), context_(std::move(context)) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) {
      fail(ErrorKind::MalformedFile, context_ + ": " + std::to_string(remaining()) + " trailing bytes");
    }
  }
  [[noreturn]] void malformed(const std::string& what) const { fail(ErrorKind::MalformedFile, context_ + ": " + what); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) malformed("truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string context_;
};

}  // namespace ctcf::binary
