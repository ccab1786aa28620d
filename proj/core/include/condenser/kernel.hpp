#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "condenser/geometry.hpp"

namespace condenser {

enum class KernelKind { Riesz, Green };

struct AssembleOptions {
  double diag_scale = 1.0;  // multiplies the regularized self-values
  int max_escalations = 8;  // doublings of diag_scale until the factorization succeeds
};

// Dense symmetric PD operator over the F and Dc nodes of one cloud
// (F nodes first, in cloud order, then Dc nodes). The diagonal carries the
// regularized self-values (separation radius)^(alpha-n) * diag_scale; PD is
// certified by a successful Cholesky factorization.
struct KernelOperator {
  KernelKind kind = KernelKind::Riesz;
  double alpha = 2.0;
  int dim = 3;
  std::vector<int> nodes;       // global node ids in row order
  Eigen::MatrixXd m;
  Eigen::VectorXd self_values;  // regularized diagonal in effect
  double diag_scale = 1.0;      // after escalation
  int escalations = 0;
  double asymmetry = 0.0;       // Green only: max |G - G^T| before symmetrization
  int floored_diagonals = 0;    // Green only
  int n_f = 0;                  // rows [0, n_f) are F nodes

  int size() const { return static_cast<int>(m.rows()); }
  int local_index(int global_node) const;  // -1 when absent

  Eigen::Ref<const Eigen::MatrixXd> ff() const { return m.topLeftCorner(n_f, n_f); }
  Eigen::Ref<const Eigen::MatrixXd> fq() const {
    return m.topRightCorner(n_f, size() - n_f);
  }
  Eigen::Ref<const Eigen::MatrixXd> qq() const {
    return m.bottomRightCorner(size() - n_f, size() - n_f);
  }

 private:
  mutable std::vector<int> lookup_;  // lazily built global -> local
  friend KernelOperator assemble(const PointCloud&, double, const AssembleOptions&);
  friend struct GreenAssembly;
};

// |x-y|^(alpha-n). Requires 0 < alpha <= 2 <= n and x != y.
double riesz_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double alpha, int n);

// Assembles the Riesz operator over F and Dc nodes (probes excluded).
// Throws when the factorization still fails after max_escalations doublings.
KernelOperator assemble(const PointCloud& cloud, double alpha,
                        const AssembleOptions& opts = {});

// U[i] = sum_j K[query_i, node_j] w_j, including regularized self-terms when a
// query node carries mass. Query nodes must belong to the operator.
Eigen::VectorXd potential(const KernelOperator& K, const DiscreteMeasure& mu,
                          const std::vector<int>& query);

// w_mu^T K w_nu over shared node indexing. Full form, diagonal included.
double energy(const KernelOperator& K, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Same with i == j terms dropped; exact under Kelvin transforms.
double offdiag_energy(const KernelOperator& K, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu);

// Direct kernel sum at an arbitrary point (no regularization; the point must
// not coincide with a support node). Works for any cloud subset via measure.
double riesz_potential_at(const PointCloud& cloud, const DiscreteMeasure& mu, double alpha,
                          const Eigen::VectorXd& x);

// Binary dump: 16-byte header (magic "KOP1", uint32 size, float32 alpha,
// uint32 dim), then size*size row-major float64, little-endian.
void dump_kernel(const KernelOperator& K, const std::string& path);
KernelOperator load_kernel(const std::string& path);  // node ids restored as 0..size-1

}  // namespace condenser
