#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace pfrl {

// Shortest decimal form that parses back to the same double. Locale-free.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

}  // namespace pfrl
