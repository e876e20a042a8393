#include "gridao/trilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gridao/errors.hpp"
#include "gridao/rng.hpp"

namespace gridao {

namespace {

constexpr double kRankTolerance = 1e-12;

// Solves G X^T = RHS^T for X where G is the F x F gram of a factor update.
// The gram must be well conditioned; a collapsed factor column makes it
// singular and the fit cannot continue meaningfully.
class GramSolver {
 public:
  explicit GramSolver(const Eigen::MatrixXd& gram)
      : svd_(gram, Eigen::ComputeFullU | Eigen::ComputeFullV) {
    const auto& sigma = svd_.singularValues();
    if (sigma(0) <= 0.0 || sigma(sigma.size() - 1) < kRankTolerance * sigma(0)) {
      throw SingularUpdateError(
          "singular factor update: gram condition exceeds 1e12; lower the number of factors");
    }
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return svd_.solve(rhs); }

 private:
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
};

// Leading eigenvectors of gram (symmetric PSD), largest eigenvalue first.
Eigen::MatrixXd leading_eigenvectors(const Eigen::MatrixXd& gram, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::Index dim = gram.rows();
  Eigen::MatrixXd out(dim, count);
  for (std::size_t f = 0; f < count; ++f) {
    out.col(f) = eig.eigenvectors().col(dim - 1 - static_cast<Eigen::Index>(f));
  }
  return out;
}

struct FitState {
  Eigen::MatrixXd a;  // n x F
  Eigen::MatrixXd b;  // J x F
  Eigen::MatrixXd c;  // K x F
  std::vector<std::size_t> subset;
  std::vector<double> loss_trace;
  std::vector<double> rss;  // per-observation residual sum of squares
  double loss = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

class TensorView {
 public:
  explicit TensorView(const FunctionalDataset& ds)
      : ds_(ds), rows_(ds.rows()), cols_(ds.cols()) {}

  // J x K matrix of observation i.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  slab(std::size_t i) const {
    return {ds_.observations[i].values.data(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }

  std::size_t size() const { return ds_.size(); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  const FunctionalDataset& ds_;
  std::size_t rows_;
  std::size_t cols_;
};

// Least-squares coefficient rows for every observation given fixed B and C,
// plus the resulting per-observation residuals.
void score_all(const TensorView& tensor, FitState& st) {
  const Eigen::MatrixXd gram =
      (st.b.transpose() * st.b).cwiseProduct(st.c.transpose() * st.c);
  const GramSolver solver(gram);
  const std::size_t n = tensor.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto yi = tensor.slab(i);
    const Eigen::MatrixXd yc = yi * st.c;  // J x F
    const Eigen::VectorXd rhs = st.b.cwiseProduct(yc).colwise().sum().transpose();
    const Eigen::VectorXd ai = solver.solve(rhs);
    st.a.row(i) = ai.transpose();
    const Eigen::MatrixXd fitted = st.b * ai.asDiagonal() * st.c.transpose();
    st.rss[i] = (yi - fitted).squaredNorm();
  }
}

// Subset of the m observations with the smallest residuals; ties keep the
// lower index.
void select_subset(const FitState& st, std::size_t m, std::vector<std::size_t>& subset) {
  const std::size_t n = st.rss.size();
  subset.resize(n);
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  std::stable_sort(subset.begin(), subset.end(),
                   [&](std::size_t x, std::size_t y) { return st.rss[x] < st.rss[y]; });
  subset.resize(m);
  std::sort(subset.begin(), subset.end());
}

void update_b(const TensorView& tensor, FitState& st) {
  const std::size_t f = st.b.cols();
  Eigen::MatrixXd at_a = Eigen::MatrixXd::Zero(f, f);
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(tensor.rows(), f);
  for (std::size_t i : st.subset) {
    const auto yi = tensor.slab(i);
    at_a.noalias() += st.a.row(i).transpose() * st.a.row(i);
    num.noalias() += (yi * st.c) * st.a.row(i).asDiagonal();
  }
  const Eigen::MatrixXd gram = at_a.cwiseProduct(st.c.transpose() * st.c);
  const GramSolver solver(gram);
  st.b = solver.solve(num.transpose()).transpose();
}

void update_c(const TensorView& tensor, FitState& st) {
  const std::size_t f = st.c.cols();
  Eigen::MatrixXd at_a = Eigen::MatrixXd::Zero(f, f);
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(tensor.cols(), f);
  for (std::size_t i : st.subset) {
    const auto yi = tensor.slab(i);
    at_a.noalias() += st.a.row(i).transpose() * st.a.row(i);
    num.noalias() += (yi.transpose() * st.b) * st.a.row(i).asDiagonal();
  }
  const Eigen::MatrixXd gram = at_a.cwiseProduct(st.b.transpose() * st.b);
  const GramSolver solver(gram);
  st.c = solver.solve(num.transpose()).transpose();
}

double subset_loss(const FitState& st) {
  double loss = 0.0;
  for (std::size_t i : st.subset) loss += st.rss[i];
  return loss;
}

// Initial B and C: leading factors of the subset tensor's mode-2 and mode-3
// covariances (a truncated higher-order SVD).
void init_factors(const TensorView& tensor, FitState& st, std::size_t f) {
  Eigen::MatrixXd cov_b = Eigen::MatrixXd::Zero(tensor.rows(), tensor.rows());
  Eigen::MatrixXd cov_c = Eigen::MatrixXd::Zero(tensor.cols(), tensor.cols());
  for (std::size_t i : st.subset) {
    const auto yi = tensor.slab(i);
    cov_b.noalias() += yi * yi.transpose();
    cov_c.noalias() += yi.transpose() * yi;
  }
  st.b = leading_eigenvectors(cov_b, f);
  st.c = leading_eigenvectors(cov_c, f);
}

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t m, CounterRng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i + 1));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(m);
  std::sort(perm.begin(), perm.end());
  return perm;
}

FitState run_restart(const TensorView& tensor, const TrilinearConfig& cfg, std::size_t m,
                     std::uint64_t restart, double loss_floor) {
  const std::size_t n = tensor.size();
  const std::size_t f = cfg.num_factors;

  FitState st;
  st.a.resize(n, f);
  st.rss.resize(n);
  CounterRng rng(cfg.seed, restart);
  st.subset = draw_subset(n, m, rng);
  init_factors(tensor, st, f);

  // Pre-loop scoring puts the starting subset on the same footing as every
  // later one: coefficients from the initial factors, then keep the m best.
  score_all(tensor, st);
  select_subset(st, m, st.subset);
  st.loss = subset_loss(st);

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    update_b(tensor, st);
    update_c(tensor, st);
    score_all(tensor, st);
    select_subset(st, m, st.subset);
    const double loss = subset_loss(st);
    st.loss_trace.push_back(loss);
    st.iterations = it + 1;
    const double prev = st.loss;
    st.loss = loss;
    // Below the floor the residuals are round-off of the data scale and the
    // relative-change test would chase noise forever.
    if (loss <= loss_floor) {
      st.converged = true;
      break;
    }
    const double denom = std::max(prev, std::numeric_limits<double>::min());
    if (std::abs(prev - loss) < cfg.tolerance * denom) {
      st.converged = true;
      break;
    }
  }
  return st;
}

void normalize(TrilinearModel& model) {
  const Eigen::Index f = model.b.cols();
  for (Eigen::Index col = 0; col < f; ++col) {
    const double nb = model.b.col(col).norm();
    const double nc = model.c.col(col).norm();
    if (nb > 0.0) model.b.col(col) /= nb;
    if (nc > 0.0) model.c.col(col) /= nc;
    model.a.col(col) *= nb * nc;

    Eigen::Index arg = 0;
    model.b.col(col).cwiseAbs().maxCoeff(&arg);
    if (model.b(arg, col) < 0.0) {
      model.b.col(col) = -model.b.col(col);
      model.a.col(col) = -model.a.col(col);
    }
    model.c.col(col).cwiseAbs().maxCoeff(&arg);
    if (model.c(arg, col) < 0.0) {
      model.c.col(col) = -model.c.col(col);
      model.a.col(col) = -model.a.col(col);
    }
  }
}

}  // namespace

TrilinearModel fit_trilinear(const FunctionalDataset& ds, const TrilinearConfig& cfg) {
  ds.validate();
  if (ds.channels() != 1) {
    throw InvalidInputError("trilinear fit expects single-channel observations");
  }
  if (ds.any_mask()) {
    throw InvalidInputError("trilinear fit cannot handle missing cells; impute first");
  }
  if (cfg.num_factors < 1) throw InvalidInputError("num_factors must be >= 1");
  if (!(cfg.trim_fraction > 0.5) || !(cfg.trim_fraction <= 1.0)) {
    throw InvalidInputError("trim_fraction must lie in (0.5, 1]");
  }
  if (cfg.max_iter < 1) throw InvalidInputError("max_iter must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw InvalidInputError("tolerance must be positive");
  if (cfg.num_restarts < 1) throw InvalidInputError("num_restarts must be >= 1");

  const std::size_t n = ds.size();
  // Small slack keeps ceil() honest when h * n is an exact integer that the
  // product slightly overshoots.
  const std::size_t m = std::min(
      n, static_cast<std::size_t>(std::ceil(cfg.trim_fraction * static_cast<double>(n) - 1e-9)));
  if (n < cfg.num_factors + 1) {
    throw InsufficientDataError("need at least F + 1 observations, got " + std::to_string(n));
  }
  if (m < cfg.num_factors + 1) {
    throw InsufficientDataError("trimmed subset of " + std::to_string(m) +
                                " observations is too small for F = " +
                                std::to_string(cfg.num_factors));
  }

  const TensorView tensor(ds);
  double norm_sq = 0.0;
  for (const auto& obs : ds.observations) {
    for (double v : obs.values) norm_sq += v * v;
  }
  const double loss_floor = 1e-28 * norm_sq;

  FitState best;
  std::size_t best_restart = 0;
  bool have_best = false;
  for (std::size_t r = 0; r < cfg.num_restarts; ++r) {
    FitState st = run_restart(tensor, cfg, m, r, loss_floor);
    if (!have_best || st.loss < best.loss) {
      best = std::move(st);
      best_restart = r;
      have_best = true;
    }
  }

  TrilinearModel model;
  model.a = std::move(best.a);
  model.b = std::move(best.b);
  model.c = std::move(best.c);
  model.subset = std::move(best.subset);
  model.loss_trace = std::move(best.loss_trace);
  model.trimmed_loss = best.loss;
  model.iterations = best.iterations;
  model.converged = best.converged;
  model.restart_index = best_restart;
  normalize(model);
  return model;
}

FunctionalDataset residuals(const FunctionalDataset& ds, const TrilinearModel& model) {
  ds.validate();
  if (ds.channels() != 1) {
    throw InvalidInputError("residuals expect single-channel observations");
  }
  if (static_cast<Eigen::Index>(ds.size()) != model.a.rows() ||
      static_cast<Eigen::Index>(ds.rows()) != model.b.rows() ||
      static_cast<Eigen::Index>(ds.cols()) != model.c.rows()) {
    throw InvalidInputError("model shape does not match the dataset");
  }

  FunctionalDataset out;
  out.weights = ds.weights;
  out.observations.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    GridFunction res = ds.observations[i];
    for (std::size_t j = 0; j < ds.rows(); ++j) {
      for (std::size_t k = 0; k < ds.cols(); ++k) {
        res.value(j, k) -= model.fitted(i, j, k);
      }
    }
    out.observations.push_back(std::move(res));
  }
  return out;
}

}  // namespace gridao
