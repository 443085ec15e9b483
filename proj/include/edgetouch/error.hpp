/*
 * Copyright 2026 The edgetouch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace edgetouch {

/// Coarse failure class. Maps one-to-one onto the C API status codes and the
/// CLI exit codes.
enum class ErrorKind {
  kInvalidArgument = 1,
  kData = 2,
  kNumerical = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}
[[noreturn]] inline void throw_data(const std::string& what) {
  throw Error(ErrorKind::kData, what);
}
[[noreturn]] inline void throw_numerical(const std::string& what) {
  throw Error(ErrorKind::kNumerical, what);
}

}  // namespace edgetouch
