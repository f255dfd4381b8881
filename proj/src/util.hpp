#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgt {

// Error taxonomy mirrors the CLI exit codes: usage/input problems vs.
// bound-cap situations that leave a check inconclusive.
enum class ErrorKind {
    Parse,        // malformed DSL or JSON input
    Validation,   // well-formed input violating an invariant (sorts, closure, ...)
    Bound,        // a configured cap or scheme bound was exceeded
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void parse_error(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }
[[noreturn]] inline void validation_error(const std::string& msg) { throw Error(ErrorKind::Validation, msg); }
[[noreturn]] inline void bound_error(const std::string& msg) { throw Error(ErrorKind::Bound, msg); }

std::string sha256_hex(const std::string& data);

std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Fixed-width bitset over a dynamically sized universe; used for extension
// sets during lattice saturation.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    std::size_t size() const { return bits_; }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    Bitset& operator&=(const Bitset& o);
    Bitset& operator|=(const Bitset& o);
    bool operator==(const Bitset& o) const { return bits_ == o.bits_ && words_ == o.words_; }
    bool is_subset_of(const Bitset& o) const;
    bool any() const;
    std::size_t count() const;

    std::size_t hash() const;

    static Bitset full(std::size_t bits);

private:
    std::size_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace mgt
