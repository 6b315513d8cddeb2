#include "nlsp/operators.hpp"

#include <string>

#include "nlsp/errors.hpp"

namespace nlsp {

ComplexField LinearOperator::apply(const ComplexField& x) const {
  ComplexField out(x.size());
  out.real() = matrix * x.real();
  out.imag() = matrix * x.imag();
  return out;
}

Eigen::MatrixXd schrodinger_matrix(const Grid& grid, const RealField& diagonal) {
  require_same_size(grid, diagonal.size(), "schrodinger_matrix");
  if (grid.size() > kMaxDensePoints)
    throw PreconditionError("dense operators support at most " + std::to_string(kMaxDensePoints) +
                            " grid points");
  Eigen::MatrixXd m = -laplacian_matrix(grid);
  m.diagonal() += diagonal;
  return m;
}

LinearOperator assemble_operator(OperatorKind kind, const Background& background,
                                 const DerivedPotentials& potentials) {
  const Grid& g = *background.grid;
  require_same_size(g, background.f.size(), "assemble_operator f");
  require_same_size(g, potentials.U.size(), "assemble_operator U");
  require_same_size(g, potentials.W.size(), "assemble_operator W");
  require_same_size(g, background.potential.size(), "assemble_operator V");
  if (kind == OperatorKind::Laplacian) return {kind, background.grid, laplacian_matrix(g)};
  const RealField l2_diag = background.potential + potentials.U - RealField::Constant(g.size(), background.omega);
  LinearOperator op{kind, background.grid, schrodinger_matrix(g, l2_diag)};
  if (kind == OperatorKind::L1)
    op.matrix.diagonal() += 2.0 * background.f.cwiseProduct(potentials.W);
  return op;
}

OperatorPair assemble_pair(const Background& background, const DerivedPotentials& potentials) {
  OperatorPair pair;
  pair.l2 = assemble_operator(OperatorKind::L2, background, potentials);
  pair.l1 = pair.l2;
  pair.l1.kind = OperatorKind::L1;
  pair.l1.matrix.diagonal() += 2.0 * background.f.cwiseProduct(potentials.W);
  return pair;
}

}  // namespace nlsp
