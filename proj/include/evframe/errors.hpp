#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace evframe {

/// Invalid configuration: geometry, bank count, window parameters, CLI flags.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed event text. Carries the 1-based line number and the offending field.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, std::string field, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

  private:
    std::size_t line_;
    std::string field_;
};

/// A timestamp went backwards where the consumer requires a non-decreasing stream.
class StreamOrderError : public std::runtime_error {
  public:
    StreamOrderError(std::uint64_t previous, std::uint64_t current, std::size_t line = 0);

    std::uint64_t previous() const noexcept { return previous_; }
    std::uint64_t current() const noexcept { return current_; }

  private:
    std::uint64_t previous_;
    std::uint64_t current_;
};

}// namespace evframe
