#pragma once

// Little-endian byte encoding shared by the core and assembly snapshot formats.

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "maelstrom/error.hpp"
#include "maelstrom/numerics.hpp"

namespace maelstrom::bytes {

class Writer {
  public:
    void raw(std::string_view s) { out_.append(s); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u64(s.size());
        raw(s);
    }
    void matrix(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        for (double x : m.data()) f64(x);
    }

    const std::string& bytes() const noexcept { return out_; }
    std::string take() { return std::move(out_); }

  private:
    std::string out_;
};

class Reader {
  public:
    explicit Reader(std::string_view in) : in_(in) {}

    std::string_view raw(std::size_t n) {
        need(n);
        const auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u64();
        return std::string(raw(n));
    }
    Matrix matrix() {
        const auto rows = u64();
        const auto cols = u64();
        need(rows * cols * 8);
        std::vector<double> data(rows * cols);
        for (double& x : data) x = f64();
        return Matrix(rows, cols, std::move(data));
    }

    bool done() const noexcept { return pos_ == in_.size(); }

  private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw InputError("snapshot is truncated");
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace maelstrom::bytes
