#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "cover.hpp"
#include "errors.hpp"
#include "nview.hpp"
#include "parallel.hpp"

namespace essavg {

using Mat9 = Eigen::Matrix<double, 9, 9>;

struct AdmmConfig {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    int max_outer_iters = 500;
    double outer_tol = 1e-8;    // relative change of E
    double primal_tol = 1e-7;   // max residual over B, D
    int inner_D_max_iters = 1;
    double inner_D_tol = 1e-10;
};

struct TraceRecord {
    int iteration = 0;
    double objective = 0;
    double max_primal_B = 0;
    double max_primal_D = 0;
    double rel_change = 0;
    int skipped = 0;  // triplets whose D-step hit an eigenvalue multiplicity
};

struct AdmmState {
    MultiviewEssential E;
    std::vector<Mat9> B, D, Gamma, Phi;
    int iteration = 0;
    std::vector<TraceRecord> trace;
};

struct AdmmResult {
    MultiviewEssential E;
    std::vector<TraceRecord> trace;
    int iterations = 0;
    bool converged = false;
};

struct NotConvergedError : Error {
    AdmmResult best;
    NotConvergedError(const std::string& msg, AdmmResult b)
        : Error(msg), best(std::move(b)) {}
};

namespace detail {

inline std::vector<int> triplet_views(const Triplet& t) {
    return {t.i, t.j, t.k};
}

// position of view v inside the ordered triple
inline int view_pos(const Triplet& t, int v) {
    if (v == t.i) return 0;
    if (v == t.j) return 1;
    return 2;
}

}  // namespace detail

inline AdmmState init_admm_state(const MultiviewEssential& E_hat,
                                 const TripletCover& cover) {
    AdmmState st;
    st.E = MultiviewEssential(E_hat.n);
    for (auto [i, j] : cover.pairs()) st.E.set_block(i, j, E_hat.block(i, j));
    for (const auto& t : cover.triplets) {
        Mat9 Z = E_hat.submatrix(detail::triplet_views(t));
        st.B.push_back(Z);
        st.D.push_back(Z);
        st.Gamma.push_back(Mat9::Zero());
        st.Phi.push_back(Mat9::Zero());
    }
    return st;
}

// Exact minimizer of the blockwise quadratic in E_ab, before the
// equal-singular-value projection.
inline Mat3 step_E_closed_form(const AdmmState& st,
                               const MultiviewEssential& E_hat,
                               const TripletCover& cover,
                               const AdmmConfig& cfg, int a, int b) {
    Mat3 num = 2.0 * E_hat.block(a, b);
    int cnt = 0;
    for (size_t k = 0; k < cover.triplets.size(); ++k) {
        const Triplet& t = cover.triplets[k];
        std::array<int, 3> v{t.i, t.j, t.k};
        if (std::count(v.begin(), v.end(), a) == 0 ||
            std::count(v.begin(), v.end(), b) == 0)
            continue;
        ++cnt;
        int ai = detail::view_pos(t, a), bi = detail::view_pos(t, b);
        Mat9 SB = st.B[k] + st.Gamma[k];
        Mat9 SD = st.D[k] + st.Phi[k];
        num += cfg.alpha1 * 0.5 *
               (SB.block<3, 3>(3 * ai, 3 * bi) +
                SB.block<3, 3>(3 * bi, 3 * ai).transpose());
        num += cfg.alpha2 * 0.5 *
               (SD.block<3, 3>(3 * ai, 3 * bi) +
                SD.block<3, 3>(3 * bi, 3 * ai).transpose());
    }
    return num / (2.0 + (cfg.alpha1 + cfg.alpha2) * cnt);
}

inline Mat3 project_equal_singular(const Mat3& M) {
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    double sb = 0.5 * (sv(0) + sv(1));
    return svd.matrixU().leftCols<2>() * sb *
           svd.matrixV().leftCols<2>().transpose();
}

inline void step_E(AdmmState& st, const MultiviewEssential& E_hat,
                   const TripletCover& cover, const AdmmConfig& cfg) {
    std::vector<std::pair<int, int>> pairs(st.E.mask.begin(), st.E.mask.end());
    std::vector<Mat3> blocks(pairs.size());
    parallel_for(pairs.size(), [&](size_t p) {
        auto [a, b] = pairs[p];
        blocks[p] = project_equal_singular(
            step_E_closed_form(st, E_hat, cover, cfg, a, b));
    });
    for (size_t p = 0; p < pairs.size(); ++p)
        st.E.set_block(pairs[p].first, pairs[p].second, blocks[p]);
}

// Projection onto paired spectra: eigenvalues in descending order, the i-th
// paired against the (10-i)-th, the middle three zeroed.
inline Mat9 step_B(const Mat9& E_blk, const Mat9& Gamma_blk = Mat9::Zero()) {
    Mat9 Z = E_blk - Gamma_blk;
    Eigen::SelfAdjointEigenSolver<Mat9> es(Z);
    Eigen::Matrix<double, 9, 1> w;
    Mat9 Q;
    for (int k = 0; k < 9; ++k) {  // descending
        w(k) = es.eigenvalues()(8 - k);
        Q.col(k) = es.eigenvectors().col(8 - k);
    }
    Eigen::Matrix<double, 9, 1> ws = Eigen::Matrix<double, 9, 1>::Zero();
    for (int i = 0; i < 3; ++i) {
        ws(i) = 0.5 * (w(i) - w(8 - i));
        ws(8 - i) = -ws(i);
    }
    return Q * ws.asDiagonal() * Q.transpose();
}

// Iterative projection toward the block-rotation constraint: spectral form,
// best sign configuration, blockwise scaled-SO(3) projection, reassembly.
inline Mat9 step_D(const Mat9& E_blk, const Mat9& Phi_blk = Mat9::Zero(),
                   int max_iters = 20, double tol = 1e-10) {
    Mat9 Z = E_blk - Phi_blk;
    for (int it = 0; it < max_iters; ++it) {
        SpectralForm f = spectral_form(Z);
        double best = -1;
        SignConfiguration best_sign;
        for (const auto& sign : all_sign_configurations()) {
            double sc = block_rotation_score(f.X, f.Y, sign);
            if (sc > best) {
                best = sc;
                best_sign = sign;
            }
        }
        Mat3 Is = best_sign.diag();
        Eigen::MatrixXd V0 = std::sqrt(0.5) * (f.X + f.Y * Is);
        Eigen::MatrixXd U = std::sqrt(0.5) * (f.X - f.Y * Is);
        Eigen::MatrixXd V(9, 3);
        for (int i = 0; i < 3; ++i) {
            auto [R, s] = project_to_scaled_rotation(V0.block<3, 3>(3 * i, 0));
            V.block<3, 3>(3 * i, 0) = s * R;
        }
        Eigen::MatrixXd Xt = std::sqrt(0.5) * (U + V);
        Eigen::MatrixXd Yt = std::sqrt(0.5) * (V - U);
        Mat9 Zn = Xt * f.sigma_plus.asDiagonal() * Xt.transpose() +
                  Yt * f.sigma_minus.asDiagonal() * Yt.transpose();
        double d = (Zn - Z).norm();
        Z = Zn;
        if (d < tol) break;
    }
    return Z;
}

inline void step_duals(AdmmState& st, const TripletCover& cover) {
    for (size_t k = 0; k < cover.triplets.size(); ++k) {
        Mat9 Et = st.E.submatrix(detail::triplet_views(cover.triplets[k]));
        st.Gamma[k] += st.B[k] - Et;
        st.Phi[k] += st.D[k] - Et;
    }
}

// Full ADMM loop. Throws NotConvergedError carrying the lowest-primal iterate
// when the iteration budget runs out.
inline AdmmResult solve(const MultiviewEssential& E_hat,
                        const TripletCover& cover,
                        const AdmmConfig& cfg = {}) {
    AdmmState st = init_admm_state(E_hat, cover);
    size_t m = cover.triplets.size();
    std::vector<Mat9> E_hat_t(m);
    for (size_t k = 0; k < m; ++k)
        E_hat_t[k] = E_hat.submatrix(detail::triplet_views(cover.triplets[k]));

    Eigen::MatrixXd best_E;
    double best_prim = -1;
    bool converged = false;

    for (int it = 0; it < cfg.max_outer_iters; ++it) {
        Eigen::MatrixXd E_prev = st.E.M;
        step_E(st, E_hat, cover, cfg);

        std::vector<double> prim_B(m), prim_D(m);
        std::vector<int> skipped(m, 0);
        std::vector<Mat9> Et(m);
        for (size_t k = 0; k < m; ++k)
            Et[k] = st.E.submatrix(detail::triplet_views(cover.triplets[k]));
        parallel_for(m, [&](size_t k) {
            st.B[k] = step_B(Et[k], st.Gamma[k]);
            try {
                st.D[k] = step_D(Et[k], st.Phi[k], cfg.inner_D_max_iters,
                                 cfg.inner_D_tol);
            } catch (const EigenvalueMultiplicityError&) {
                skipped[k] = 1;
            }
            st.Gamma[k] += st.B[k] - Et[k];
            st.Phi[k] += st.D[k] - Et[k];
            prim_B[k] = (st.B[k] - Et[k]).norm();
            prim_D[k] = (st.D[k] - Et[k]).norm();
        });

        TraceRecord rec;
        rec.iteration = it;
        for (size_t k = 0; k < m; ++k) {
            rec.objective += (Et[k] - E_hat_t[k]).squaredNorm();
            rec.max_primal_B = std::max(rec.max_primal_B, prim_B[k]);
            rec.max_primal_D = std::max(rec.max_primal_D, prim_D[k]);
            rec.skipped += skipped[k];
        }
        double dE = (st.E.M - E_prev).norm();
        double nE = std::max(E_prev.norm(), 1e-300);
        rec.rel_change = dE / nE;
        st.trace.push_back(rec);
        st.iteration = it + 1;

        double prim = std::max(rec.max_primal_B, rec.max_primal_D);
        if (best_prim < 0 || prim < best_prim) {
            best_prim = prim;
            best_E = st.E.M;
        }
        if ((it > 0 && rec.rel_change < cfg.outer_tol) ||
            prim < cfg.primal_tol) {
            converged = true;
            break;
        }
    }

    AdmmResult res;
    res.E = st.E;
    res.trace = st.trace;
    res.iterations = st.iteration;
    res.converged = converged;
    if (!converged) {
        res.E.M = best_E;
        throw NotConvergedError("solve: iteration budget exhausted", res);
    }
    return res;
}

}  // namespace essavg
