#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sx/matcore.hpp"
#include "sx/workload.hpp"

namespace sx {

/// Knobs for the decomposition. r = 0 picks the basis size automatically
/// (kernel width S for square CONV kernels, 3 for fc/1x1 reshapes).
struct SEParams {
    int r = 0;               ///< basis size n (coefficient columns); 0 = auto
    int n_p = 4;             ///< max exponent-set cardinality
    double theta_v = 0.0;    ///< row-norm fraction for vector sparsity
    double theta_c = 0.0;    ///< channel-score threshold
    double tol = 1e-10;      ///< convergence tolerance on ||delta(C_e)||
    int max_iter = 30;
    int slice_rows = 64;     ///< max rows per sliced sub-matrix

    void validate() const;
    int basis_size(const LayerSpec& layer) const;
};

struct TraceRecord {
    double rel_error = 0.0;     ///< frob(w - ce*basis) / frob(w)
    double row_sparsity = 0.0;  ///< zeroed rows / total rows
    double basis_drift = 0.0;   ///< frob(basis - I)
};

/// Decomposition result: w ~ ce * basis with ce entries in {0, +-2^p | p in P}.
struct SEForm {
    Matrix ce;
    Matrix basis;
    std::vector<int> p_set;           ///< sorted exponents, |p_set| <= n_p
    std::vector<bool> row_mask;       ///< row_mask[i] <=> row i of ce has a nonzero
    std::vector<bool> channel_mask;   ///< per input channel, empty = all kept
    std::vector<TraceRecord> trace;   ///< one record per iteration + final record
    int iterations = 0;
    bool normalized_every_iteration = true;

    std::int64_t zero_rows() const;
    double row_sparsity() const;
    std::int64_t nonzero_count() const;  ///< element-wise L0 of ce
};

struct StorageStats {
    std::int64_t bits_dense = 0;
    std::int64_t bits_basis = 0;
    std::int64_t bits_ce = 0;
    std::int64_t bits_index = 0;
    double cr = 0.0;        ///< bits_dense / (bits_basis + bits_ce + bits_index)
    double sparsity = 0.0;  ///< zeroed coefficient rows / total rows
    std::int64_t nonzero_elems = 0;
    std::int64_t total_rows = 0;

    std::int64_t bits_se() const { return bits_basis + bits_ce + bits_index; }
};

/// Placement metadata for one reshaped sub-matrix of a layer.
struct SlicePlacement {
    std::int64_t unit = 0;       ///< filter index (conv) / output row (fc)
    std::int64_t row_begin = 0;  ///< first row inside the unit's reshaped matrix
    std::int64_t rows = 0;
    std::int64_t pad_cells = 0;  ///< zero-padded cells in this slice (fc tail)
};

struct ReshapedLayer {
    std::vector<Matrix> mats;
    std::vector<SlicePlacement> placements;
    int basis_size = 0;
    std::int64_t rows_per_channel = 0;  ///< conv: rows each input channel owns per matrix
};

/// Reshape layer weights into the matrices the decomposition runs on.
/// CONV with R=S>1: per filter a (C*R, S) matrix (row c*R+r, column s), sliced
/// into chunks of at most slice_rows rows. FC: per output row a (ceil(C/S), S)
/// matrix, zero-padded. 1x1 CONV is reshaped to (M, C) and treated as FC.
ReshapedLayer reshape_layer(const std::vector<float>& weights,
                            const LayerSpec& layer, const SEParams& params);

/// Inverse of reshape_layer; pad cells are dropped.
std::vector<float> unreshape_layer(const ReshapedLayer& shape,
                                   const std::vector<Matrix>& mats,
                                   const LayerSpec& layer);

/// The n_p most frequent nearest-integer log2 magnitudes among nonzeros
/// (ties to the smaller exponent). All-zero input returns {0}.
std::vector<int> select_exponents(const Matrix& ce, int n_p);

/// Scale each column to unit L2 norm (all-zero columns untouched).
Matrix normalize_columns(const Matrix& ce);

/// Project nonzeros onto {+-2^p | p in p_set}: x -> sign(x) * 2^q with q the
/// exponent nearest to log2|x| (ties to the smaller exponent). Zeros stay zero.
/// Returns the projection and delta = frob(projected - input).
std::pair<Matrix, double> quantize_pow2(const Matrix& ce, const std::vector<int>& p_set);

/// Two half-steps of alternating least squares: refit basis with ce fixed,
/// then refit ce with the new basis fixed. Neither half-step may increase the
/// Frobenius residual (up to 1e-9 * ||w|| slack).
std::pair<Matrix, Matrix> fit_step(const Matrix& w, const Matrix& ce, const Matrix& basis);

/// Zero every row whose L2 norm is below theta_v * (max row norm). The max
/// row always survives.
Matrix sparsify_vector(const Matrix& ce, double theta_v);

/// Keep-flags per channel: score < theta_c drops the channel. Empty scores
/// give an identity mask.
std::vector<bool> sparsify_channel(const std::vector<double>& channel_scores,
                                   std::int64_t channels, double theta_c);

/// Zero the ce rows of dropped channels in one reshaped conv matrix.
void apply_channel_mask(Matrix& ce, const std::vector<bool>& mask,
                        const SlicePlacement& place, std::int64_t rows_per_channel);

/// Algorithm: init ce = w, basis = I; channel-sparsify once; iterate
/// {normalize+quantize, fit, vector-sparsify} until ||delta(C_e)|| < tol or
/// max_iter; then re-quantize ce and re-fit basis.
SEForm decompose(const Matrix& w, const SEParams& params,
                 const std::vector<bool>& channel_mask = {},
                 const SlicePlacement& place = {}, std::int64_t rows_per_channel = 0);

/// ce * basis via exponent arithmetic: each term is a basis entry scaled by
/// +-2^p with ldexp, never a general multiply.
Matrix reconstruct(const SEForm& form);

/// Aggregate storage accounting for one layer's decomposed slices.
/// bits_dense = bits_ref * dense weight count (pad cells excluded);
/// bits_ce covers all entries of kept rows; 1 index bit per coefficient row.
/// Forms with no kept rows contribute no basis bits.
StorageStats encode_stats(const std::vector<SEForm>& forms, const LayerSpec& layer,
                          int bits_ref, int bits_ce, int bits_basis);

}  // namespace sx
