#pragma once

#include <Eigen/Sparse>

#include "collodiff/mesh.hpp"

namespace collodiff {

enum class LaplacianMode { Cotangent, Uniform };

// Discrete mesh Laplacian. Off-diagonal L[i,j] holds the edge weight
// (cotangent: w_ij = (cot a_ij + cot b_ij)/2, clamped to [0, 1e4];
// uniform: w_ij = 1); the diagonal is minus the row sum, so L * 1 == 0.
Eigen::SparseMatrix<double> cotangent_laplacian(const Mesh& mesh,
                                                LaplacianMode mode = LaplacianMode::Cotangent);

// n x 3 position matrix used with the Laplacian.
Eigen::MatrixX3d position_matrix(const Mesh& mesh);

}  // namespace collodiff
