#pragma once

#include <cstdint>
#include <vector>

#include "chemid/forward.hpp"

namespace chemid {

/// Space-time inner product: trapezoidal rule in time (weights dt/2 at the
/// endpoints, dt inside) with the mesh mass matrix in space.
double st_inner(const TriMesh& mesh, const TimeSeriesField& u, const TimeSeriesField& v);
double st_norm(const TriMesh& mesh, const TimeSeriesField& u);
/// st_norm(a - b) without materializing the difference.
double st_norm(const TriMesh& mesh, const TimeSeriesField& a, const TimeSeriesField& b);

/// Slicewise a - b; both series must share dt, length and mesh.
TimeSeriesField series_diff(const TimeSeriesField& a, const TimeSeriesField& b);

enum class NoiseKind { gaussian, uniform };

struct ObservedData {
    TimeSeriesField rho;
    double delta = 0.0;
    std::uint64_t seed = 0;
};

/// rho^delta = truth + e, where every time slice (including t = 0) is
/// perturbed and e is rescaled so that st_norm(e) == delta exactly.
/// delta == 0 returns the truth bit for bit. Draws come from mt19937_64
/// through a hand-rolled Box-Muller transform (or a plain affine map for
/// the uniform kind), so the stream does not depend on the standard
/// library's distribution implementations.
ObservedData add_noise(const TriMesh& mesh, const TimeSeriesField& truth,
                       double delta, std::uint64_t seed,
                       NoiseKind kind = NoiseKind::gaussian);

/// Affine-linear surrogate of the forward map, linearized around an observed
/// density trajectory:
///
///   (T f)(0)       = rho_0
///   (T f)(t^{n+1}) = S^{-1} [ M (T f)(t^n) + dt * B_{n+1} f(rho^delta(t^n)) ]
///
/// with S = M + dt D_rho K and B_{n+1} the flux load against the
/// chemoattractant c^delta(t^{n+1}) reconstructed from the observed density
/// by the elliptic solve. Both occurrences of the state in the nonlinearity
/// are frozen at the data, which makes f -> T f affine: T f = A f + b with
/// A linear and b = T 0. On noiseless data T reproduces the forward
/// simulation exactly (same composition weights, same chemoattractant chain,
/// same solver calls), not just up to solver tolerance.
///
/// The mesh must outlive the operator. f lives on the uniform n_param-node
/// grid over [0, 1].
class AffineOperator {
public:
    AffineOperator(const TriMesh& mesh, const ModelConfig& cfg,
                   const PiecewiseLinear1D& g, const NodalField& rho0,
                   const TimeSeriesField& observed_rho, int n_param);

    int n_param() const { return n_param_; }
    int n_time_steps() const { return static_cast<int>(c_levels_.size()); }
    const ForwardWorkspace& workspace() const { return ws_; }
    /// c^delta at steps 1..N (index n holds the level used by step n -> n+1).
    const std::vector<NodalField>& chemoattractant() const { return c_levels_; }
    /// b = T 0: diffusion-only evolution of rho_0.
    const TimeSeriesField& offset() const { return offset_; }

    /// A f: the trajectory of T f with zero initial state.
    TimeSeriesField apply_linear(const PiecewiseLinear1D& f) const;
    /// T f = A f + b, computed in one fused recursion from rho_0.
    TimeSeriesField apply_full(const PiecewiseLinear1D& f) const;
    /// A^T y in the pairing  st_inner(A f, y) = f . apply_adjoint(y);
    /// the t = 0 slice of y never enters since (A f)(0) = 0.
    PiecewiseLinear1D apply_adjoint(const TimeSeriesField& y) const;

    /// st_norm(T f - target).
    double residual_norm(const PiecewiseLinear1D& f, const TimeSeriesField& target) const;

    /// Columns A e_j for every parameter node; small meshes only.
    std::vector<TimeSeriesField> basis_images() const;

private:
    NodalField compose_frozen(int n, const PiecewiseLinear1D& f) const;

    const TriMesh& mesh_;
    ForwardWorkspace ws_;
    int n_param_;
    NodalField rho0_;
    std::vector<NodalField> c_levels_;               // steps 1..N
    std::vector<std::vector<HatWeights>> weights_;   // frozen at rho^delta, steps 0..N-1
    TimeSeriesField offset_;
};

/// st_norm(T f - truth_rho) for the operator built on `data`: how far the
/// frozen-coefficient surrogate drifts from the underlying nonlinear
/// trajectory. Scales like the noise level for small delta.
double perturbation_gap(const TriMesh& mesh, const ModelConfig& cfg,
                        const PiecewiseLinear1D& f, const PiecewiseLinear1D& g,
                        const NodalField& rho0, const TimeSeriesField& truth_rho,
                        const ObservedData& data);

}  // namespace chemid
