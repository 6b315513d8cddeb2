#pragma once

#include "nlsp/grid.hpp"
#include "nlsp/model.hpp"

namespace nlsp {

enum class OperatorKind { L1, L2, Laplacian };

/// Dense matrix form of one of the linearisation operators
///   L2 = -Laplacian + V + U - omega,   L1 = L2 + 2 f W
/// or of the Laplacian itself.
struct LinearOperator {
  OperatorKind kind = OperatorKind::Laplacian;
  GridPtr grid;
  Eigen::MatrixXd matrix;

  RealField apply(const RealField& x) const { return matrix * x; }
  ComplexField apply(const ComplexField& x) const;
};

/// Largest grid handled by the dense operator representation.
inline constexpr int kMaxDensePoints = 2048;

/// -Laplacian + diag(diagonal)
Eigen::MatrixXd schrodinger_matrix(const Grid& grid, const RealField& diagonal);

LinearOperator assemble_operator(OperatorKind kind, const Background& background,
                                 const DerivedPotentials& potentials);

struct OperatorPair {
  LinearOperator l1;
  LinearOperator l2;
};

OperatorPair assemble_pair(const Background& background, const DerivedPotentials& potentials);

}  // namespace nlsp
