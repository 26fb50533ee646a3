#include "bar/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "bar/error.hpp"

namespace bar {

FeedbackWindow::FeedbackWindow(int capacity) : capacity_(capacity) {
  require(capacity >= 1, Errc::invalid_argument,
          "feedback window: capacity must be >= 1");
}

void FeedbackWindow::push(const BlockFeedback& fb) {
  require(fb.n >= 0 && fb.x >= 0 && fb.x <= fb.n, Errc::invalid_argument,
          "feedback: need 0 <= x <= n");
  slots_.emplace_back(fb);
  evict();
}

void FeedbackWindow::push_lost() {
  slots_.emplace_back(std::nullopt);
  evict();
}

void FeedbackWindow::evict() {
  while (static_cast<int>(slots_.size()) > capacity_) slots_.pop_front();
}

int FeedbackWindow::received() const noexcept {
  int k = 0;
  for (const auto& s : slots_) k += s ? 1 : 0;
  return k;
}

long FeedbackWindow::total_sent() const noexcept {
  long n = 0;
  for (const auto& s : slots_)
    if (s) n += s->n;
  return n;
}

long FeedbackWindow::total_received() const noexcept {
  long x = 0;
  for (const auto& s : slots_)
    if (s) x += s->x;
  return x;
}

std::optional<double> estimate_mle(const FeedbackWindow& window) {
  const long n = window.total_sent();
  if (n == 0) return window.last_estimate();
  return static_cast<double>(n - window.total_received()) /
         static_cast<double>(n);
}

std::optional<double> estimate_minimax(const FeedbackWindow& window) {
  const long n = window.total_sent();
  if (n == 0) return window.last_estimate();
  const double nd = static_cast<double>(n);
  const double root = std::sqrt(nd);
  return (static_cast<double>(n - window.total_received()) + 0.5 * root) /
         (nd + root);
}

void BayesState::validate() const {
  require(a > 0.0 && b > 0.0, Errc::invalid_argument,
          "Bayes state: a and b must be > 0");
  require(gamma >= 0.0 && gamma <= 1.0, Errc::invalid_argument,
          "Bayes state: gamma must lie in [0, 1]");
}

BayesResult estimate_bayes(const BayesState& state, const BlockFeedback& obs) {
  state.validate();
  require(obs.n >= 0 && obs.x >= 0 && obs.x <= obs.n, Errc::invalid_argument,
          "feedback: need 0 <= x <= n");
  const double lost = static_cast<double>(obs.n - obs.x);
  const double got = static_cast<double>(obs.x);
  BayesResult out;
  out.state.gamma = state.gamma;
  out.state.a = state.gamma * state.a + lost;
  out.state.b = state.gamma * state.b + got;
  const double den = out.state.a + out.state.b;
  out.p_hat = den > 0.0 ? out.state.a / den : state.a / (state.a + state.b);
  // gamma = 0 with an empty observation would zero both counts.
  if (out.state.a <= 0.0 || out.state.b <= 0.0) {
    const double floor = 1e-300;
    out.state.a = std::max(out.state.a, floor);
    out.state.b = std::max(out.state.b, floor);
  }
  return out;
}

double default_gamma(int window) {
  require(window >= 1, Errc::invalid_argument, "window must be >= 1");
  return std::pow(0.1, 1.0 / window);
}

LossRateEstimator::LossRateEstimator(EstimatorKind kind, int window,
                                     std::optional<double> gamma)
    : kind_(kind), window_(window) {
  bayes_.gamma = gamma.value_or(default_gamma(window));
  bayes_.validate();
}

void LossRateEstimator::observe(const std::optional<BlockFeedback>& fb) {
  if (!fb) {
    window_.push_lost();
    return;
  }
  window_.push(*fb);
  switch (kind_) {
    case EstimatorKind::mle:
      estimate_ = estimate_mle(window_);
      break;
    case EstimatorKind::minimax:
      estimate_ = estimate_minimax(window_);
      break;
    case EstimatorKind::bayes: {
      const BayesResult r = estimate_bayes(bayes_, *fb);
      bayes_ = r.state;
      estimate_ = r.p_hat;
      break;
    }
  }
  if (estimate_) window_.set_last_estimate(*estimate_);
}

}  // namespace bar
