#pragma once

#include <deque>
#include <optional>

namespace bar {

/// Packets sent for one block and packets that arrived.
struct BlockFeedback {
  long n = 0;
  long x = 0;
};

/// Time frame of the last W blocks. A block whose feedback was lost still
/// occupies its slot, so the received set shrinks under feedback loss.
class FeedbackWindow {
 public:
  explicit FeedbackWindow(int capacity);

  void push(const BlockFeedback& fb);
  void push_lost();

  int capacity() const noexcept { return capacity_; }
  int slots() const noexcept { return static_cast<int>(slots_.size()); }
  int received() const noexcept;
  long total_sent() const noexcept;
  long total_received() const noexcept;

  std::optional<double> last_estimate() const noexcept { return last_; }
  void set_last_estimate(double p) noexcept { last_ = p; }

 private:
  void evict();

  int capacity_;
  std::deque<std::optional<BlockFeedback>> slots_;
  std::optional<double> last_;
};

/// (n - x) / n over the blocks with feedback. Falls back to the window's
/// last estimate when none arrived; nullopt before any estimate exists.
std::optional<double> estimate_mle(const FeedbackWindow& window);

/// (n - x + sqrt(n) / 2) / (n + sqrt(n)), same fallback.
std::optional<double> estimate_minimax(const FeedbackWindow& window);

/// Beta(a, b) pseudo-counts faded by gamma per update. Jeffreys prior.
struct BayesState {
  double a = 0.5;
  double b = 0.5;
  double gamma = 1.0;

  void validate() const;
};

struct BayesResult {
  BayesState state;
  double p_hat = 0.0;
};

/// Posterior Beta(gamma a + n - x, gamma b + x) and its mean.
BayesResult estimate_bayes(const BayesState& state, const BlockFeedback& obs);

/// 0.1^(1/W): an observation drops to 10% weight after W updates.
double default_gamma(int window);

enum class EstimatorKind { mle, minimax, bayes };

/// One estimate per received feedback; lost feedback leaves the estimate
/// unchanged.
class LossRateEstimator {
 public:
  LossRateEstimator(EstimatorKind kind, int window,
                    std::optional<double> gamma = std::nullopt);

  void observe(const std::optional<BlockFeedback>& fb);
  std::optional<double> estimate() const noexcept { return estimate_; }

  EstimatorKind kind() const noexcept { return kind_; }

 private:
  EstimatorKind kind_;
  FeedbackWindow window_;
  BayesState bayes_;
  std::optional<double> estimate_;
};

}  // namespace bar
