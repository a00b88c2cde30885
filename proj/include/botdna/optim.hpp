#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "botdna/tensor.hpp"

namespace botdna {

struct AdamOptions {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment buffers are keyed by the registration order of
// the parameter list given at construction.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options);

  // Applies one update from the current Parameter::grad values.
  // Throws NumericError on a non-finite gradient, before touching anything.
  void step();

  void set_lr(double lr) { options_.lr = lr; }
  double lr() const { return options_.lr; }
  std::size_t steps() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  AdamOptions options_;
  std::size_t t_ = 0;
};

// Multiplies the learning rate by `factor` after `patience` consecutive
// epochs whose monitored value is not strictly below the best so far.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor, std::size_t patience)
      : factor_(factor), patience_(patience) {}

  // Returns the learning rate to use for the next epoch.
  double observe(double value, double lr);
  std::size_t reductions() const { return reductions_; }

 private:
  double factor_;
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
  std::size_t reductions_ = 0;
};

// Signals a stop after `patience` consecutive epochs without a strict
// improvement and remembers the best epoch.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when the run should stop. `improved()` reports whether the
  // value just observed became the new best.
  bool observe(std::size_t epoch, double value);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t bad_epochs_ = 0;
  bool improved_ = false;
};

}  // namespace botdna
