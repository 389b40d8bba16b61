#include "gllab/links.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gllab/parallel.hpp"

namespace gllab {

namespace {

// One grid line of n cells. D is the (n+1) x n derivative matrix acting on F_1..F_n (F_0 = 0).
class LineIntegrator {
 public:
  LineIntegrator(int n, double h) : n_(n) {
    std::vector<Eigen::Triplet<double>> t;
    const double c = 0.5 / h;
    auto put = [&](int row, int col, double v) {
      if (col >= 1) t.emplace_back(row, col - 1, v);
    };
    put(0, 0, -3 * c);
    put(0, 1, 4 * c);
    put(0, 2, -c);
    for (int i = 1; i < n; ++i) {
      put(i, i + 1, c);
      put(i, i - 1, -c);
    }
    put(n, n, 3 * c);
    put(n, n - 1, -4 * c);
    put(n, n - 2, c);
    D_.resize(n + 1, n);
    D_.setFromTriplets(t.begin(), t.end());
    Eigen::SparseMatrix<double> N = D_.transpose() * D_;
    llt_.compute(N);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("link_phases: factorization failed");
  }

  void phases(const double* a, std::size_t stride, double* theta) const {
    Eigen::VectorXd rhs(n_ + 1);
    for (int i = 0; i <= n_; ++i) rhs[i] = a[i * stride];
    const Eigen::VectorXd F = llt_.solve(D_.transpose() * rhs);
    theta[0] = F[0];
    for (int i = 1; i < n_; ++i) theta[i] = F[i] - F[i - 1];
  }

  void adjoint(const double* gt, double* ga, std::size_t stride) const {
    Eigen::VectorXd r(n_);
    for (int k = 0; k < n_; ++k) r[k] = gt[k] - (k + 1 < n_ ? gt[k + 1] : 0.0);
    const Eigen::VectorXd y = D_ * llt_.solve(r);
    for (int i = 0; i <= n_; ++i) ga[i * stride] = y[i];
  }

  void potential(const double* theta, double* a, std::size_t stride) const {
    Eigen::VectorXd F(n_);
    double acc = 0;
    for (int k = 0; k < n_; ++k) F[k] = acc += theta[k];
    const Eigen::VectorXd y = D_ * F;
    for (int i = 0; i <= n_; ++i) a[i * stride] = y[i];
  }

 private:
  int n_;
  Eigen::SparseMatrix<double> D_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

std::shared_ptr<const LineIntegrator> integrator(int n, double h) {
  static std::mutex m;
  static std::map<std::pair<int, double>, std::shared_ptr<const LineIntegrator>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[{n, h}];
  if (!slot) slot = std::make_shared<LineIntegrator>(n, h);
  return slot;
}

}  // namespace

EdgeField link_phases(const VectorField& A) {
  const auto& g = A.grid;
  EdgeField t(g);
  const auto lx = integrator(g.nx, g.hx());
  const auto ly = integrator(g.ny, g.hy());
  parallel_for(g.ny + 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) lx->phases(A.x.data() + g.idx(0, j), 1, t.x.data() + t.xe(0, j));
  });
  parallel_for(g.nx + 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ly->phases(A.y.data() + i, g.nx + 1, t.y.data() + t.ye(i, 0));
  });
  return t;
}

VectorField link_phases_adjoint(const EdgeField& t) {
  const auto& g = t.grid;
  VectorField A(g);
  const auto lx = integrator(g.nx, g.hx());
  const auto ly = integrator(g.ny, g.hy());
  parallel_for(g.ny + 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) lx->adjoint(t.x.data() + t.xe(0, j), A.x.data() + g.idx(0, j), 1);
  });
  parallel_for(g.nx + 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ly->adjoint(t.y.data() + t.ye(i, 0), A.y.data() + i, g.nx + 1);
  });
  return A;
}

VectorField link_potential(const EdgeField& t) {
  const auto& g = t.grid;
  VectorField A(g);
  const auto lx = integrator(g.nx, g.hx());
  const auto ly = integrator(g.ny, g.hy());
  parallel_for(g.ny + 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) lx->potential(t.x.data() + t.xe(0, j), A.x.data() + g.idx(0, j), 1);
  });
  parallel_for(g.nx + 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ly->potential(t.y.data() + t.ye(i, 0), A.y.data() + i, g.nx + 1);
  });
  return A;
}

}  // namespace gllab
