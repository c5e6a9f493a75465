#include "oddm/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace oddm {

namespace {

using RowMatXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Edge {
  int obs = 0;
  int var = 0;
  cxd coef;
};

DetectionResult pack_result(const std::vector<int>& hard, const Eigen::MatrixXd& post,
                            const QamConstellation& cons, int M, int N, int iters,
                            bool converged, bool floored) {
  DetectionResult r;
  r.hard_index = hard;
  r.posteriors = post;
  r.iterations_used = iters;
  r.converged = converged;
  r.noise_floored = floored;
  r.hard_symbols.resize(M, N);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      r.hard_symbols(m, n) = cons.point(hard[m * N + n]);
    }
  }
  return r;
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

DetectionResult mp_detect(const VecXcd& y,
                          const std::vector<std::tuple<int, int, cxd>>& triplets,
                          int M, int N, const QamConstellation& cons,
                          double noise_var, const MpConfig& cfg) {
  const int dim = M * N;
  if (y.size() != dim) throw std::invalid_argument("mp_detect: dimension mismatch");
  if (cfg.damping <= 0.0 || cfg.damping > 1.0) {
    throw std::invalid_argument("mp_detect: damping must be in (0, 1]");
  }
  if (cfg.max_iters < 1) throw std::invalid_argument("mp_detect: max_iters must be >= 1");
  bool floored = false;
  if (noise_var <= 0.0) {
    noise_var = cfg.noise_floor;
    floored = true;
  }
  const int A = cons.order();

  std::vector<Edge> edges;
  edges.reserve(triplets.size());
  std::vector<std::vector<int>> obs_edges(dim), var_edges(dim);
  for (const auto& [r, c, v] : triplets) {
    obs_edges[r].push_back(static_cast<int>(edges.size()));
    var_edges[c].push_back(static_cast<int>(edges.size()));
    edges.push_back({r, c, v});
  }
  const int ne = static_cast<int>(edges.size());

  // var -> obs pmfs and their moments; obs -> var Gaussian messages
  RowMatXd pmf = RowMatXd::Constant(ne, A, 1.0 / A);
  std::vector<cxd> mean(ne, cxd(0, 0));
  std::vector<double> var(ne, 0.0);
  std::vector<cxd> obs_mean(ne);
  std::vector<double> obs_var(ne);
  RowMatXd post = RowMatXd::Constant(dim, A, 1.0 / A);
  RowMatXd post_prev = post;

  auto refresh_moments = [&](int e) {
    cxd mu(0, 0);
    double e2 = 0.0;
    for (int s = 0; s < A; ++s) {
      mu += pmf(e, s) * cons.point(s);
      e2 += pmf(e, s) * std::norm(cons.point(s));
    }
    mean[e] = mu;
    var[e] = std::max(e2 - std::norm(mu), 0.0);
  };
  for (int e = 0; e < ne; ++e) refresh_moments(e);

  int max_deg = 0;
  for (int c = 0; c < dim; ++c) {
    max_deg = std::max(max_deg, static_cast<int>(var_edges[c].size()));
  }
  RowMatXd ll(max_deg, A);
  Eigen::VectorXd total(A), excl(A), pnew(A);

  int it = 0;
  bool converged = false;
  for (it = 1; it <= cfg.max_iters; ++it) {
    // observation pass: interference mean/variance excluding each edge
    for (int d = 0; d < dim; ++d) {
      cxd tot_m(0, 0);
      double tot_v = noise_var;
      for (int e : obs_edges[d]) {
        tot_m += edges[e].coef * mean[e];
        tot_v += std::norm(edges[e].coef) * var[e];
      }
      for (int e : obs_edges[d]) {
        obs_mean[e] = tot_m - edges[e].coef * mean[e];
        obs_var[e] = std::max(tot_v - std::norm(edges[e].coef) * var[e], cfg.noise_floor);
      }
    }
    // variable pass: damped pmf updates and posteriors
    post_prev.swap(post);
    for (int c = 0; c < dim; ++c) {
      const auto& inc = var_edges[c];
      const int deg = static_cast<int>(inc.size());
      for (int i = 0; i < deg; ++i) {
        const int e = inc[i];
        const int d = edges[e].obs;
        for (int s = 0; s < A; ++s) {
          const cxd r = y[d] - obs_mean[e] - edges[e].coef * cons.point(s);
          ll(i, s) = -std::norm(r) / obs_var[e];
        }
      }
      total = ll.topRows(deg).colwise().sum();
      for (int i = 0; i < deg; ++i) {
        const int e = inc[i];
        excl = total - ll.row(i).transpose();
        excl.array() -= excl.maxCoeff();
        pnew = excl.array().exp();
        pnew /= pnew.sum();
        pmf.row(e) = cfg.damping * pnew.transpose() + (1.0 - cfg.damping) * pmf.row(e);
        refresh_moments(e);
      }
      total.array() -= total.maxCoeff();
      pnew = total.array().exp();
      post.row(c) = (pnew / pnew.sum()).transpose();
    }
    const double delta = (post - post_prev).cwiseAbs().maxCoeff();
    if (delta < cfg.convergence_eps) {
      converged = true;
      if (cfg.early_stop) break;
    }
  }
  if (it > cfg.max_iters) it = cfg.max_iters;

  std::vector<int> hard(dim);
  for (int c = 0; c < dim; ++c) {
    hard[c] = argmax_lowest(post.row(c).transpose());
  }
  return pack_result(hard, post, cons, M, N, it, converged, floored);
}

DetectionResult mp_detect(const VecXcd& y, const DdChannelMatrix& Hm,
                          const QamConstellation& cons, double noise_var,
                          const MpConfig& cfg) {
  return mp_detect(y, Hm.triplets(), Hm.M(), Hm.N(), cons, noise_var, cfg);
}

DetectionResult mmse_detect(const VecXcd& y, const DdChannelMatrix& Hm,
                            const QamConstellation& cons, double noise_var) {
  if (Hm.dim() > 4096) throw std::invalid_argument("mmse_detect: MN > 4096");
  const bool floored = noise_var <= 0.0;
  const double reg = std::max(noise_var, 1e-12);
  const MatXcd Hd = Hm.dense();
  const MatXcd A = Hd.adjoint() * Hd + reg * MatXcd::Identity(Hm.dim(), Hm.dim());
  Eigen::LDLT<MatXcd> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("mmse_detect: singular system beyond regularization");
  }
  const VecXcd xhat = ldlt.solve(Hd.adjoint() * y);
  const int dim = static_cast<int>(Hm.dim());
  std::vector<int> hard(dim);
  Eigen::MatrixXd post = Eigen::MatrixXd::Zero(dim, cons.order());
  for (int i = 0; i < dim; ++i) {
    hard[i] = cons.slice(xhat[i]);
    post(i, hard[i]) = 1.0;
  }
  return pack_result(hard, post, cons, Hm.M(), Hm.N(), 1, true, floored);
}

DetectionResult map_bruteforce(const VecXcd& y, const DdChannelMatrix& Hm,
                               const QamConstellation& cons, double noise_var) {
  const int dim = static_cast<int>(Hm.dim());
  const int A = cons.order();
  double candidates = std::pow(static_cast<double>(A), dim);
  if (candidates > static_cast<double>(1 << 20)) {
    throw std::invalid_argument("map_bruteforce: instance too large");
  }
  const bool floored = noise_var <= 0.0;
  const double nv = std::max(noise_var, 1e-10);
  const MatXcd Hd = Hm.dense();

  std::vector<int> idx(dim, 0), best(dim, 0);
  VecXcd x(dim);
  double best_r = std::numeric_limits<double>::infinity();
  std::vector<double> residuals;
  residuals.reserve(static_cast<std::size_t>(candidates));
  std::vector<std::vector<int>> labels;
  labels.reserve(static_cast<std::size_t>(candidates));
  while (true) {
    for (int i = 0; i < dim; ++i) x[i] = cons.point(idx[i]);
    const double r = (y - Hd * x).squaredNorm();
    residuals.push_back(r);
    labels.push_back(idx);
    if (r < best_r) {
      best_r = r;
      best = idx;
    }
    int pos = dim - 1;
    while (pos >= 0 && ++idx[pos] == A) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  // exact per-symbol marginals from the full enumeration
  Eigen::MatrixXd post = Eigen::MatrixXd::Zero(dim, A);
  for (std::size_t c = 0; c < residuals.size(); ++c) {
    const double w = std::exp(-(residuals[c] - best_r) / nv);
    for (int i = 0; i < dim; ++i) post(i, labels[c][i]) += w;
  }
  for (int i = 0; i < dim; ++i) post.row(i) /= post.row(i).sum();
  return pack_result(best, post, cons, Hm.M(), Hm.N(), 1, true, floored);
}

}  // namespace oddm
