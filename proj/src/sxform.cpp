#include "sx/sxform.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sx {

void SEParams::validate() const {
    if (n_p < 1) throw config_error("SEParams: n_p must be >= 1");
    if (max_iter < 1) throw config_error("SEParams: max_iter must be >= 1");
    if (!(tol > 0.0)) throw config_error("SEParams: tol must be > 0");
    if (theta_v < 0.0 || theta_v >= 1.0) throw config_error("SEParams: theta_v in [0,1)");
    if (r < 0) throw config_error("SEParams: r must be >= 0");
    if (slice_rows < 1) throw config_error("SEParams: slice_rows must be >= 1");
}

int SEParams::basis_size(const LayerSpec& layer) const {
    const bool square_conv = layer.kind != LayerKind::fc && layer.R == layer.S && layer.S > 1;
    if (r > 0) {
        if (square_conv && r != layer.S)
            throw config_error("SEParams: r must equal kernel width S for conv layers");
        return r;
    }
    return square_conv ? static_cast<int>(layer.S) : 3;
}

std::int64_t SEForm::zero_rows() const {
    std::int64_t z = 0;
    for (bool keep : row_mask)
        if (!keep) ++z;
    return z;
}

double SEForm::row_sparsity() const {
    if (row_mask.empty()) return 0.0;
    return static_cast<double>(zero_rows()) / static_cast<double>(row_mask.size());
}

std::int64_t SEForm::nonzero_count() const {
    std::int64_t n = 0;
    for (Eigen::Index i = 0; i < ce.size(); ++i)
        if (ce.data()[i] != 0.0) ++n;
    return n;
}

// ---------------------------------------------------------------- reshaping

ReshapedLayer reshape_layer(const std::vector<float>& weights, const LayerSpec& layer,
                            const SEParams& params) {
    params.validate();
    layer.validate();
    const std::int64_t expect = layer_weight_count(layer);
    if (static_cast<std::int64_t>(weights.size()) != expect)
        throw shape_error("reshape_layer: got " + std::to_string(weights.size()) +
                          " weights, layer '" + layer.name + "' needs " + std::to_string(expect));

    ReshapedLayer out;
    out.basis_size = params.basis_size(layer);
    const int n = out.basis_size;
    if (params.slice_rows < n)
        throw config_error("SEParams: slice_rows must be >= basis size");

    const bool square_conv = layer.kind != LayerKind::fc && layer.R == layer.S && layer.S > 1;
    const bool one_by_one = layer.kind != LayerKind::fc && layer.R == 1 && layer.S == 1;
    if (layer.kind != LayerKind::fc && !square_conv && !one_by_one)
        throw shape_error("reshape_layer: conv layer '" + layer.name +
                          "' needs R = S (got R=" + std::to_string(layer.R) +
                          " S=" + std::to_string(layer.S) + ")");

    if (square_conv) {
        // Row c*R + r of filter m holds kernel row (m, c, r, :).
        const std::int64_t filters = layer.M;
        const std::int64_t chans = layer.kind == LayerKind::dwconv ? 1 : layer.C;
        const std::int64_t rows = chans * layer.R;
        out.rows_per_channel = layer.R;
        for (std::int64_t m = 0; m < filters; ++m) {
            for (std::int64_t r0 = 0; r0 < rows; r0 += params.slice_rows) {
                const std::int64_t take = std::min<std::int64_t>(params.slice_rows, rows - r0);
                Matrix mat(take, n);
                for (std::int64_t i = 0; i < take; ++i)
                    for (std::int64_t s = 0; s < n; ++s)
                        mat(i, s) = weights[(m * rows + r0 + i) * layer.S + s];
                if (!is_finite(mat)) throw shape_error("reshape_layer: non-finite weight");
                out.mats.push_back(std::move(mat));
                out.placements.push_back({m, r0, take, 0});
            }
        }
        return out;
    }

    // fc and 1x1 conv: each output row of the (M, C) matrix becomes a
    // (ceil(C/n), n) block, zero-padded at the tail, then sliced.
    const std::int64_t rows = (layer.C + n - 1) / n;
    for (std::int64_t m = 0; m < layer.M; ++m) {
        for (std::int64_t r0 = 0; r0 < rows; r0 += params.slice_rows) {
            const std::int64_t take = std::min<std::int64_t>(params.slice_rows, rows - r0);
            Matrix mat = Matrix::Zero(take, n);
            std::int64_t pad_here = 0;
            for (std::int64_t i = 0; i < take; ++i)
                for (std::int64_t s = 0; s < n; ++s) {
                    const std::int64_t c = (r0 + i) * n + s;
                    if (c < layer.C)
                        mat(i, s) = weights[m * layer.C + c];
                    else
                        ++pad_here;
                }
            if (!is_finite(mat)) throw shape_error("reshape_layer: non-finite weight");
            out.mats.push_back(std::move(mat));
            out.placements.push_back({m, r0, take, pad_here});
        }
    }
    return out;
}

std::vector<float> unreshape_layer(const ReshapedLayer& shape, const std::vector<Matrix>& mats,
                                   const LayerSpec& layer) {
    if (mats.size() != shape.placements.size())
        throw shape_error("unreshape_layer: matrix count mismatch");
    std::vector<float> weights(layer_weight_count(layer), 0.0f);
    const int n = shape.basis_size;
    const bool square_conv = layer.kind != LayerKind::fc && layer.R == layer.S && layer.S > 1;
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const auto& pl = shape.placements[k];
        const Matrix& mat = mats[k];
        if (mat.rows() != pl.rows || mat.cols() != n)
            throw shape_error("unreshape_layer: slice shape mismatch");
        if (square_conv) {
            const std::int64_t chans = layer.kind == LayerKind::dwconv ? 1 : layer.C;
            const std::int64_t rows = chans * layer.R;
            for (std::int64_t i = 0; i < pl.rows; ++i)
                for (std::int64_t s = 0; s < n; ++s)
                    weights[(pl.unit * rows + pl.row_begin + i) * layer.S + s] =
                        static_cast<float>(mat(i, s));
        } else {
            for (std::int64_t i = 0; i < pl.rows; ++i)
                for (std::int64_t s = 0; s < n; ++s) {
                    const std::int64_t c = (pl.row_begin + i) * n + s;
                    if (c < layer.C)
                        weights[pl.unit * layer.C + c] = static_cast<float>(mat(i, s));
                }
        }
    }
    return weights;
}

// ------------------------------------------------------------ quantization

// Nearest double to sqrt(2)/2, the mantissa at a geometric midpoint.
static constexpr double kSqrtHalf = 0.70710678118654752440;
// Relative tie band around a midpoint. Columns of equal-magnitude powers of
// two sit exactly on midpoints (norm 2^p * sqrt(k)), and the fit's ridge
// perturbs them at the 1e-12 level; anything inside the band counts as a tie
// so one column can never round apart.
static constexpr double kMidBand = 1e-9;

// Sign of log2|x| - (p1+p2)/2 with the tie band, computed from exact
// power-of-two scalings rather than log2 of the magnitude (whose last ulps
// jitter at midpoints).
static int cmp_geomid(double mag, int p1, int p2) {
    const int mid = p1 + p2;
    double ratio;
    if (mid % 2 == 0) {
        ratio = mag / std::ldexp(1.0, mid / 2);
    } else {
        // Midpoint 2^((mid+1)/2) * sqrt(2)/2; mid+1 is even.
        ratio = std::ldexp(mag, -(mid + 1) / 2) / kSqrtHalf;
    }
    if (std::abs(ratio - 1.0) <= kMidBand) return 0;
    return ratio < 1.0 ? -1 : 1;
}

// Nearest integer to log2|x| with ties (and the tie band) toward the smaller
// integer.
static long nearest_exponent(double mag) {
    int e = 0;
    const double m = std::frexp(mag, &e);  // mag = m * 2^e, m in [0.5, 1)
    const double ratio = m / kSqrtHalf;
    if (ratio > 1.0 + kMidBand) return e;
    return e - 1;
}

std::vector<int> select_exponents(const Matrix& ce, int n_p) {
    if (n_p < 1) throw config_error("select_exponents: n_p must be >= 1");
    std::map<long, std::int64_t> counts;
    for (Eigen::Index i = 0; i < ce.size(); ++i) {
        const double v = ce.data()[i];
        if (v == 0.0) continue;
        counts[nearest_exponent(std::abs(v))]++;
    }
    if (counts.empty()) return {0};
    std::vector<std::pair<long, std::int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(ranked.size()) > n_p) ranked.resize(n_p);
    std::vector<int> p;
    for (const auto& [e, c] : ranked) p.push_back(static_cast<int>(e));
    std::sort(p.begin(), p.end());
    return p;
}

Matrix normalize_columns(const Matrix& ce) {
    Matrix out = ce;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double nrm = out.col(j).norm();
        if (nrm > 0.0) out.col(j) /= nrm;
    }
    return out;
}

std::pair<Matrix, double> quantize_pow2(const Matrix& ce, const std::vector<int>& p_set) {
    if (p_set.empty()) throw config_error("quantize_pow2: empty exponent set");
    std::vector<int> sorted = p_set;
    std::sort(sorted.begin(), sorted.end());
    Matrix out = ce;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double& v = out.data()[i];
        if (v == 0.0) continue;
        const double mag = std::abs(v);
        // Walk the sorted exponents; the magnitude belongs to the candidate
        // whose midpoint interval contains it, ties to the smaller exponent.
        int best = sorted.front();
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            if (cmp_geomid(mag, best, sorted[k]) > 0)
                best = sorted[k];
            else
                break;
        }
        v = std::copysign(std::ldexp(1.0, best), v);
    }
    const double delta = (out - ce).norm();
    return {std::move(out), delta};
}

std::pair<Matrix, Matrix> fit_step(const Matrix& w, const Matrix& ce, const Matrix& basis) {
    if (ce.rows() != w.rows() || basis.rows() != ce.cols() || basis.cols() != w.cols())
        throw shape_error("fit_step: inconsistent shapes");
    Matrix basis2 = solve_lsq(ce, w);
    // ||w - C B|| = ||w^T - B^T C^T|| gives the coefficient refit.
    Matrix ce2 = solve_lsq(basis2.transpose(), w.transpose()).transpose();
    return {std::move(basis2), std::move(ce2)};
}

Matrix sparsify_vector(const Matrix& ce, double theta_v) {
    if (theta_v < 0.0 || theta_v >= 1.0) throw config_error("sparsify_vector: theta_v in [0,1)");
    if (theta_v == 0.0 || ce.rows() == 0) return ce;
    double max_norm = 0.0;
    for (Eigen::Index i = 0; i < ce.rows(); ++i)
        max_norm = std::max(max_norm, ce.row(i).norm());
    Matrix out = ce;
    const double cut = theta_v * max_norm;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        if (out.row(i).norm() < cut) out.row(i).setZero();
    return out;
}

std::vector<bool> sparsify_channel(const std::vector<double>& scores, std::int64_t channels,
                                   double theta_c) {
    if (scores.empty()) return std::vector<bool>(channels, true);
    if (static_cast<std::int64_t>(scores.size()) != channels)
        throw shape_error("sparsify_channel: " + std::to_string(scores.size()) +
                          " scores for " + std::to_string(channels) + " channels");
    std::vector<bool> mask(channels, true);
    for (std::int64_t c = 0; c < channels; ++c) mask[c] = !(scores[c] < theta_c);
    return mask;
}

void apply_channel_mask(Matrix& ce, const std::vector<bool>& mask, const SlicePlacement& place,
                        std::int64_t rows_per_channel) {
    if (mask.empty() || rows_per_channel <= 0) return;
    for (Eigen::Index i = 0; i < ce.rows(); ++i) {
        const std::int64_t chan = (place.row_begin + i) / rows_per_channel;
        if (chan < static_cast<std::int64_t>(mask.size()) && !mask[chan]) ce.row(i).setZero();
    }
}

// -------------------------------------------------------------- decompose

static std::vector<bool> row_mask_of(const Matrix& ce) {
    std::vector<bool> mask(ce.rows(), false);
    for (Eigen::Index i = 0; i < ce.rows(); ++i)
        mask[i] = ce.row(i).cwiseAbs().maxCoeff() != 0.0;
    if (ce.rows() == 0) mask.clear();
    return mask;
}

SEForm decompose(const Matrix& w, const SEParams& params, const std::vector<bool>& channel_mask,
                 const SlicePlacement& place, std::int64_t rows_per_channel) {
    params.validate();
    if (w.size() == 0) throw shape_error("decompose: empty matrix");
    const Eigen::Index n = w.cols();
    if (params.r > 0 && params.r != n)
        throw config_error("decompose: r must equal the matrix column count");

    SEForm form;
    form.basis = Matrix::Identity(n, n);
    form.channel_mask = channel_mask;
    const double w_norm = frob_norm(w);

    if (w_norm == 0.0) {
        form.ce = Matrix::Zero(w.rows(), n);
        form.p_set = {0};
        form.row_mask = std::vector<bool>(w.rows(), false);
        form.trace.push_back({0.0, 1.0, 0.0});
        return form;
    }

    Matrix ce = w;
    Matrix basis = Matrix::Identity(n, n);
    // Channel sparsity is decided once, before the iterations.
    apply_channel_mask(ce, channel_mask, place, rows_per_channel);

    // Trace records describe the quantized solution of the iteration, the
    // sparsity of the carried coefficients, and the basis drift from identity.
    auto record = [&](const Matrix& cq, const Matrix& b, const Matrix& carried) {
        TraceRecord r;
        r.rel_error = frob_norm(w - cq * b) / w_norm;
        std::int64_t zeros = 0;
        for (Eigen::Index i = 0; i < carried.rows(); ++i)
            if (carried.row(i).cwiseAbs().maxCoeff() == 0.0) ++zeros;
        r.row_sparsity = static_cast<double>(zeros) / static_cast<double>(carried.rows());
        r.basis_drift = frob_norm(b - Matrix::Identity(n, n));
        form.trace.push_back(r);
    };

    std::vector<int> p_set = {0};
    int iter = 0;
    for (; iter < params.max_iter; ++iter) {
        // Step 1: normalize columns, pick exponents, project to powers of 2.
        Matrix normalized = normalize_columns(ce);
        p_set = select_exponents(normalized, params.n_p);
        auto [quantized, rounding_delta] = quantize_pow2(normalized, p_set);
        (void)rounding_delta;
        const double delta = frob_norm(quantized - ce);

        // Step 2: two unconstrained least squares; the fit re-absorbs the
        // column scales into the basis.
        auto [basis2, ce2] = fit_step(w, quantized, basis);
        basis = std::move(basis2);
        ce = std::move(ce2);
        apply_channel_mask(ce, channel_mask, place, rows_per_channel);

        // Step 3: vector-wise sparsity.
        ce = sparsify_vector(ce, params.theta_v);
        record(quantized, basis, ce);
        if (delta < params.tol) {
            ++iter;
            break;
        }
    }
    form.iterations = iter;

    // Re-quantize C_e and re-fit B.
    Matrix normalized = normalize_columns(ce);
    p_set = select_exponents(normalized, params.n_p);
    form.p_set = p_set;
    form.ce = quantize_pow2(normalized, p_set).first;
    apply_channel_mask(form.ce, channel_mask, place, rows_per_channel);
    form.basis = solve_lsq(form.ce, w);
    if (form.ce.cwiseAbs().maxCoeff() == 0.0) form.basis = Matrix::Identity(n, n);
    form.row_mask = row_mask_of(form.ce);
    record(form.ce, form.basis, form.ce);
    return form;
}

Matrix reconstruct(const SEForm& form) {
    const Matrix& ce = form.ce;
    const Matrix& basis = form.basis;
    if (ce.cols() != basis.rows()) throw shape_error("reconstruct: shape mismatch");
    Matrix out = Matrix::Zero(ce.rows(), basis.cols());
    for (Eigen::Index i = 0; i < ce.rows(); ++i) {
        for (Eigen::Index k = 0; k < ce.cols(); ++k) {
            const double c = ce(i, k);
            if (c == 0.0) continue;
            const int p = std::ilogb(c);
            const double sign = std::signbit(c) ? -1.0 : 1.0;
            for (Eigen::Index j = 0; j < basis.cols(); ++j)
                out(i, j) += sign * std::ldexp(basis(k, j), p);
        }
    }
    return out;
}

StorageStats encode_stats(const std::vector<SEForm>& forms, const LayerSpec& layer,
                          int bits_ref, int bits_ce, int bits_basis) {
    if (bits_ref < 1 || bits_ce < 1 || bits_basis < 1)
        throw config_error("encode_stats: bit widths must be >= 1");
    StorageStats st;
    st.bits_dense = layer_weight_count(layer) * bits_ref;
    std::int64_t zero_rows = 0;
    for (const auto& f : forms) {
        const std::int64_t kept = static_cast<std::int64_t>(f.row_mask.size()) - f.zero_rows();
        st.total_rows += static_cast<std::int64_t>(f.row_mask.size());
        zero_rows += f.zero_rows();
        st.bits_ce += bits_ce * kept * f.ce.cols();
        if (kept > 0) st.bits_basis += bits_basis * f.basis.size();
        st.bits_index += static_cast<std::int64_t>(f.row_mask.size());  // 1-bit direct index
        st.nonzero_elems += f.nonzero_count();
    }
    st.sparsity = st.total_rows ? static_cast<double>(zero_rows) / st.total_rows : 0.0;
    st.cr = static_cast<double>(st.bits_dense) / static_cast<double>(st.bits_se());
    return st;
}

}  // namespace sx
