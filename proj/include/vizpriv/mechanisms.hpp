// Copyright 2026 The vizpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace vizpriv {

using Index = Eigen::Index;

// Seedable 64-bit generator. Substreams are derived by hashing the parent
// seed with a stream id, so stages of a run are independently reproducible.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  NoiseSource substream(std::uint64_t stream) const;
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Privacy parameter of one randomized stage. Oracle disables noise and turns
// selection into argmax; results computed that way are not private.
class StageEpsilon {
 public:
  static StageEpsilon oracle() { return StageEpsilon(); }
  static StageEpsilon of(double epsilon);

  bool is_oracle() const { return oracle_; }
  double value() const;

 private:
  StageEpsilon() = default;
  bool oracle_ = true;
  double epsilon_ = 0.0;
};

double laplace_noise(double scale, NoiseSource& src);
Eigen::VectorXd laplace_mechanism(const Eigen::Ref<const Eigen::VectorXd>& values,
                                  double sensitivity, double epsilon, NoiseSource& src);

// Selection probabilities exp(eps * q / (2 dq)) normalized, computed on
// max-shifted scores.
Eigen::VectorXd exponential_probabilities(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                          double sensitivity, double epsilon);
Index exponential_select(const Eigen::Ref<const Eigen::VectorXd>& scores, double sensitivity,
                         double epsilon, NoiseSource& src);

struct BudgetSpec {
  double epsilon_total = 0.0;
  double epsilon_structure = 0.0;
  double epsilon_marginals = 0.0;

  void validate() const;
};

inline constexpr double kDefaultStructureFraction = 0.5;

BudgetSpec split_budget(double epsilon_total, double structure_fraction = kDefaultStructureFraction);

enum class Stage { kStructure, kMarginals };
std::string_view to_string(Stage stage);

// Records every privacy-consuming draw of a run. A stage's consumption is its
// reserved budget once all planned draws happened, so sequential composition
// sums exactly to the reserved total.
class BudgetLedger {
 public:
  struct Entry {
    Stage stage;
    std::string mechanism;
    double epsilon;
  };

  void reserve(Stage stage, double budget, int planned_draws);
  void record(Stage stage, std::string mechanism, double epsilon);

  int draws(Stage stage) const;
  int planned(Stage stage) const;
  double consumed(Stage stage) const;
  double total() const { return consumed(Stage::kStructure) + consumed(Stage::kMarginals); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  struct Reservation {
    double budget = 0.0;
    int planned = 0;
    bool reserved = false;
  };
  Reservation& slot(Stage s) { return s == Stage::kStructure ? structure_ : marginals_; }
  const Reservation& slot(Stage s) const { return s == Stage::kStructure ? structure_ : marginals_; }

  Reservation structure_;
  Reservation marginals_;
  std::vector<Entry> entries_;
};

}  // namespace vizpriv
