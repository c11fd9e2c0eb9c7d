#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pscwarp/curvature.hpp"
#include "pscwarp/singular.hpp"

namespace pscwarp {

/// Rotationally symmetric psc-metric on the boundary model chart
/// S^p x D^{q+1}(r_out): eps^2 ds_p^2 + dr^2 + fiber(r)^2 ds_q^2, standard
/// (torpedo of radius delta) within rho_N of the surgery sphere.
struct BoundaryModelMetric {
  int p = 1, q = 3;
  double eps = 0.1, delta = 0.1;
  double rho_N = 0.2;
  double r_out = 1.0;
  WarpFn fiber;
  bool standard = false;

  BlockMetric as_block() const;  // DoublyWarp over r for positivity scans
};

BoundaryModelMetric standard_boundary_metric(int p, int q, double eps, double delta,
                                             double rho_N, double r_out);

struct RegionDecomposition {
  int p = 1, q = 3;
  double c0 = 0.4, c1 = 0.6, rho_N = 0.2;
  double k_N = 0.0;  // U = {rho * r <= k_N} in the normal-form quadrant
  std::vector<std::string> boundary_labels;
  double vol_U0 = 0.0, vol_Uw = 0.0, vol_U1 = 0.0;
  double vol_U() const { return vol_U0 + vol_Uw + vol_U1; }
};

/// Region decomposition of the normal-form model by the levels c0 < 1/2 < c1
/// and the tube radius rho_N; charts are cross-checked against trajectory_flow.
RegionDecomposition decompose_regions(const MorseTripleModel& f, double c0, double c1,
                                      double rho_N);

struct SeamCertificate {
  std::string name;
  double max_dev = 0.0;
  double where = 0.0;
};

struct ModelCobordismMetric {
  int p = 1, q = 3;
  double eps = 0.1, delta = 0.1;
  RegionDecomposition dec;
  BoundaryModelMetric g0;
  double block_a = 0.0;  // a-extent of the standard block chart
  BlockMetric outer, U0, Uw, U1;
  std::vector<SeamCertificate> seams;

  /// Induced metric on the c1 level set: the handle piece (torpedo p-disk x
  /// round q-sphere) and the annulus just outside it.
  BlockMetric g1_handle() const;
  BlockMetric g1_annulus() const;
};

/// Builds the piecewise Gromov-Lawson model metric over an index-(p+1) critical
/// point: g0 + dt^2 outside U, the product g0|N + dt^2 on U_0, the standard
/// block tor^{p+1}(eps) + tor^{q+1}(delta) on U_w, and g1 + dt^2 on U_1.
/// Requires g0 standard (run bend_hypersurface preprocessing otherwise) and
/// q >= 2.
ModelCobordismMetric assemble_gl_cobordism(const BoundaryModelMetric& g0,
                                           const RegionDecomposition& d, double eps,
                                           double delta);

struct EquivarianceReport {
  double max_dev = 0.0;
  int n_rotations = 0;
  std::uint64_t seed = 0;
};

/// Probes O(p+1) x O(q+1) equivariance of the assembled metric by comparing
/// the ambient-coordinate metric tensor at rotated points and vectors.
EquivarianceReport equivariance_probe(const ModelCobordismMetric& m, int n_rotations,
                                      std::uint64_t seed, bool inject_fault = false);

/// Graph-hypersurface bending of a radial fiber metric d rho^2 + F(rho)^2 ds_q^2
/// along a push-out profile c(rho) (c and c' vanish near rho_N): returns the
/// induced warp reparameterized by arclength.
WarpFn bend_hypersurface(const WarpFn& fiber, const WarpFn& pushout);

struct SliceCertificate {
  double y = 0.0;
  double min_R = 0.0;
  bool psc_pass = false;
  bool boundary_pass = false;
  double boundary_dev = 0.0;
};

struct BlockFamilyReport {
  std::vector<double> ys;
  std::vector<SliceCertificate> slices;
  bool pass = false;
  double lipschitz = 0.0;        // measured warp-parameter Lipschitz constant
  double endpoint_product_dev = 0.0;   // +delta_y slice vs pure product
  double endpoint_assembly_dev = 0.0;  // -delta_y slice vs two-critical-point assembly
};

struct FamilySlice {
  double y = 0.0, theta = 0.0;
  BlockMetric outer, U0, box_w, box_z, U1;
};

/// The y-indexed family of model metrics across the standard birth-death
/// unfolding: pure product for y >= 0, the stacked two-critical-point assembly
/// at y = -delta_y, warp-parameter interpolation in between; certified
/// per-slice.
BlockFamilyReport theorem12_block_family(int s, int p, int q,
                                         const std::function<BoundaryModelMetric(double)>& g0_path,
                                         double delta_y, double eps_z, int n_slices = 21,
                                         GridSpec grid = {});

FamilySlice theorem12_slice(int p, int q, const BoundaryModelMetric& g0, double y,
                            double delta_y, double eps_z);

}  // namespace pscwarp
