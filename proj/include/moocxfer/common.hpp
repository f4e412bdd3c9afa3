// Copyright 2026 The moocxfer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MOOCXFER_COMMON_HPP_
#define MOOCXFER_COMMON_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace moocxfer {

// Error categories map one-to-one onto CLI exit codes (see moocxfer.h).
enum class ErrorKind { kArgument, kConfig, kData, kTraining, kIo };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::kConfig, w) {}
};
struct DataError : Error {
  explicit DataError(const std::string& w) : Error(ErrorKind::kData, w) {}
};
struct TrainingError : Error {
  explicit TrainingError(const std::string& w)
      : Error(ErrorKind::kTraining, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::kIo, w) {}
};
struct ArgumentError : Error {
  explicit ArgumentError(const std::string& w)
      : Error(ErrorKind::kArgument, w) {}
};

// Throws the subclass matching `kind`.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

using Rng = std::mt19937_64;

// 64-bit FNV-1a.
uint64_t fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);
uint64_t splitmix64(uint64_t x);

// Per-task seed fan-out: splitmix64(master ^ fnv1a64(tag)). Stable across
// releases; settings, courses and grid candidates each get their own stream.
uint64_t derive_seed(uint64_t master, std::string_view tag);

std::string hex64(uint64_t v);

// Hash of a file's bytes (FNV-1a 64, hex). Throws IoError when unreadable.
std::string file_hash(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

double mean(std::span<const double> xs);
// Population standard deviation; 0 when fewer than two values.
double pstdev(std::span<const double> xs);

// Linear-interpolated quantile of an unsorted sample, q in [0,1].
double quantile(std::vector<double> xs, double q);

}  // namespace moocxfer

#endif  // MOOCXFER_COMMON_HPP_
