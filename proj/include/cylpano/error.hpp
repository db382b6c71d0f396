// Copyright 2026 The Cylpano Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CYLPANO_ERROR_HPP_
#define CYLPANO_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cylpano {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kDegeneratePoint,
  kInvalidDepth,
  kBehindCamera,
  kNumeric,
  kCoverage,
};

// Base of every exception thrown by the library. The C API maps `kind()` onto
// its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class DegeneratePoint : public Error {
 public:
  explicit DegeneratePoint(const std::string& what)
      : Error(ErrorKind::kDegeneratePoint, what) {}
};

class InvalidDepth : public Error {
 public:
  explicit InvalidDepth(const std::string& what)
      : Error(ErrorKind::kInvalidDepth, what) {}
};

class BehindCamera : public Error {
 public:
  explicit BehindCamera(const std::string& what)
      : Error(ErrorKind::kBehindCamera, what) {}
};

// Raised when an objective evaluates to a non-finite value.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long index = -1)
      : Error(ErrorKind::kNumeric, what), index_(index) {}
  // Parameter index being probed when the failure occurred, or -1.
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, double azimuth)
      : Error(ErrorKind::kCoverage, what), azimuth_(azimuth) {}
  double azimuth() const noexcept { return azimuth_; }

 private:
  double azimuth_;
};

}  // namespace cylpano

#endif  // CYLPANO_ERROR_HPP_
