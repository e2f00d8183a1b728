#pragma once

#include <Eigen/Dense>
#include <array>
#include <set>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace essavg {

// Symmetric 3n x 3n block matrix with an observation mask. Block (i, j) and
// its transpose at (j, i) are stored explicitly; unobserved blocks are zero.
struct MultiviewEssential {
    int n = 0;
    Eigen::MatrixXd M;
    std::set<std::pair<int, int>> mask;

    MultiviewEssential() = default;
    explicit MultiviewEssential(int n_views)
        : n(n_views), M(Eigen::MatrixXd::Zero(3 * n_views, 3 * n_views)) {}

    bool observed(int i, int j) const {
        return mask.count({std::min(i, j), std::max(i, j)}) > 0;
    }
    Mat3 block(int i, int j) const { return M.block<3, 3>(3 * i, 3 * j); }
    void set_block(int i, int j, const Mat3& B) {
        M.block<3, 3>(3 * i, 3 * j) = B;
        M.block<3, 3>(3 * j, 3 * i) = B.transpose();
        mask.insert({std::min(i, j), std::max(i, j)});
    }
    bool fully_observed() const {
        return static_cast<int>(mask.size()) == n * (n - 1) / 2;
    }
    // Dense principal submatrix over the given views, in the given order.
    Eigen::MatrixXd submatrix(const std::vector<int>& views) const {
        int m = static_cast<int>(views.size());
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3 * m, 3 * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                if (a != b) S.block<3, 3>(3 * a, 3 * b) = block(views[a], views[b]);
        return S;
    }
};

inline MultiviewEssential build_from_poses(
    const std::vector<CameraPose>& poses,
    const std::set<std::pair<int, int>>* pairs = nullptr) {
    int n = static_cast<int>(poses.size());
    MultiviewEssential E(n);
    if (pairs) {
        for (auto [i, j] : *pairs)
            E.set_block(i, j, relative_essential(poses[i], poses[j]));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                E.set_block(i, j, relative_essential(poses[i], poses[j]));
    }
    return E;
}

struct SignConfiguration {
    std::array<int, 3> s{1, 1, 1};
    Mat3 diag() const {
        return Vec3(double(s[0]), double(s[1]), double(s[2])).asDiagonal();
    }
};

inline std::array<SignConfiguration, 8> all_sign_configurations() {
    std::array<SignConfiguration, 8> out;
    for (int m = 0; m < 8; ++m)
        for (int k = 0; k < 3; ++k) out[m].s[k] = ((m >> k) & 1) ? -1 : 1;
    return out;
}

// Top/bottom eigenpairs: sigma_plus descending, sigma_minus ascending (most
// negative first), so sigma_plus[i] pairs with -sigma_minus[i].
struct SpectralForm {
    Eigen::MatrixXd X, Y;
    Vec3 sigma_plus, sigma_minus;

    Eigen::MatrixXd reassemble() const {
        return X * sigma_plus.asDiagonal() * X.transpose() +
               Y * sigma_minus.asDiagonal() * Y.transpose();
    }
};

struct SvdForm {
    Eigen::MatrixXd U_hat, V_hat;
    Vec3 sigma;

    Eigen::MatrixXd reassemble() const {
        return U_hat * sigma.asDiagonal() * V_hat.transpose() +
               V_hat * sigma.asDiagonal() * U_hat.transpose();
    }
};

// The six nonzero eigenvalues must be pairwise distinct for the eigenvectors
// (and hence the sign search) to be well defined.
inline SpectralForm spectral_form(const Eigen::MatrixXd& S,
                                  double distinct_tol = 1e-6) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const auto& w = es.eigenvalues();
    const auto& Q = es.eigenvectors();
    int N = static_cast<int>(S.rows());
    SpectralForm f;
    f.X.resize(N, 3);
    f.Y.resize(N, 3);
    for (int k = 0; k < 3; ++k) {
        f.X.col(k) = Q.col(N - 1 - k);
        f.sigma_plus(k) = w(N - 1 - k);
        f.Y.col(k) = Q.col(k);
        f.sigma_minus(k) = w(k);
    }
    double scale = std::max(std::abs(w(0)), std::abs(w(N - 1)));
    double gap = distinct_tol * scale;
    for (int k = 0; k + 1 < 3; ++k)
        if (f.sigma_plus(k) - f.sigma_plus(k + 1) <= gap ||
            f.sigma_minus(k + 1) - f.sigma_minus(k) <= gap)
            throw EigenvalueMultiplicityError(
                "spectral_form: repeated nonzero eigenvalue");
    return f;
}

inline SpectralForm svd_to_spectral(const SvdForm& f) {
    SpectralForm s;
    s.X = std::sqrt(0.5) * (f.U_hat + f.V_hat);
    s.Y = std::sqrt(0.5) * (f.V_hat - f.U_hat);
    s.sigma_plus = f.sigma;
    s.sigma_minus = -f.sigma;
    return s;
}

inline SvdForm spectral_to_svd(const SpectralForm& s, double tol = 1e-8) {
    if ((s.sigma_plus + s.sigma_minus).cwiseAbs().maxCoeff() > tol)
        throw PairingError("spectral_to_svd: sigma_plus != -sigma_minus");
    SvdForm f;
    f.U_hat = std::sqrt(0.5) * (s.X - s.Y);
    f.V_hat = std::sqrt(0.5) * (s.X + s.Y);
    f.sigma = s.sigma_plus;
    return f;
}

// Deviation of the 3x3 blocks of V from (commonly scaled) rotations. In
// scaled mode each block is compared against its own scale; in strict mode
// every block must have Gram matrix I/n.
inline double block_rotation_residual(const Eigen::MatrixXd& V,
                                      bool strict = false) {
    int m = static_cast<int>(V.rows()) / 3;
    double r = 0;
    for (int i = 0; i < m; ++i) {
        Mat3 B = V.block<3, 3>(3 * i, 0);
        Mat3 G = B.transpose() * B;
        Mat3 dev;
        if (strict) {
            dev = double(m) * G - Mat3::Identity();
        } else {
            double d = std::max(G.trace() / 3.0, 1e-300);
            dev = G / d - Mat3::Identity();
        }
        r = std::max(r, dev.norm());
    }
    return r;
}

// Sign-selection score of the solver: sum over blocks of
// |diag(G)|_2 / |G|_F with G the Gram matrix of X_i + Y_i I_s.
// Equals the block count exactly when every block is a scaled rotation.
inline double block_rotation_score(const Eigen::MatrixXd& X,
                                   const Eigen::MatrixXd& Y,
                                   const SignConfiguration& sign) {
    int m = static_cast<int>(X.rows()) / 3;
    Mat3 Is = sign.diag();
    double sc = 0;
    for (int i = 0; i < m; ++i) {
        Mat3 B = X.block<3, 3>(3 * i, 0) + Y.block<3, 3>(3 * i, 0) * Is;
        Mat3 G = B.transpose() * B;
        sc += G.diagonal().norm() / std::max(G.norm(), 1e-300);
    }
    return sc;
}

struct FundamentalReport {
    bool ok = false;
    double rank6_residual = 0;           // sigma_7 / sigma_1 of the full matrix
    double rank6_support = 0;            // sigma_6 / sigma_1 (must stay large)
    int positive_eigenvalues = 0;
    int negative_eigenvalues = 0;
    double block_row_rank_support = 0;   // min over rows of sigma_3 / sigma_1
    double block_rank2_support = 0;      // min over blocks of sigma_2 / sigma_1
    double block_rank2_residual = 0;     // max over blocks of sigma_3 / sigma_1
};

inline FundamentalReport check_fundamental_consistency(
    const MultiviewEssential& E, double rank_tol = 1e-6) {
    if (!E.fully_observed())
        throw IncompleteMatrixError("check_fundamental_consistency: missing blocks");
    FundamentalReport rep;
    int n = E.n;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E.M);
    const auto& sv = svd.singularValues();
    double s1 = std::max(sv(0), 1e-300);
    rep.rank6_residual = (3 * n > 6) ? sv(6) / s1 : 0.0;
    rep.rank6_support = sv(5) / s1;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.M);
    double wmax = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int k = 0; k < 3 * n; ++k) {
        double w = es.eigenvalues()(k);
        if (w > rank_tol * wmax) rep.positive_eigenvalues++;
        if (w < -rank_tol * wmax) rep.negative_eigenvalues++;
    }

    rep.block_row_rank_support = 1.0;
    for (int i = 0; i < n; ++i) {
        Eigen::JacobiSVD<Eigen::MatrixXd> rs(E.M.middleRows(3 * i, 3));
        const auto& rv = rs.singularValues();
        rep.block_row_rank_support =
            std::min(rep.block_row_rank_support, rv(2) / std::max(rv(0), 1e-300));
    }

    rep.block_rank2_support = 1.0;
    rep.block_rank2_residual = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Eigen::JacobiSVD<Mat3> bs(E.block(i, j));
            const Vec3 bv = bs.singularValues();
            double b1 = std::max(bv(0), 1e-300);
            rep.block_rank2_support = std::min(rep.block_rank2_support, bv(1) / b1);
            rep.block_rank2_residual = std::max(rep.block_rank2_residual, bv(2) / b1);
        }

    rep.ok = rep.rank6_residual < rank_tol && rep.rank6_support > rank_tol &&
             rep.positive_eigenvalues == 3 && rep.negative_eigenvalues == 3 &&
             rep.block_row_rank_support > rank_tol &&
             rep.block_rank2_support > rank_tol &&
             rep.block_rank2_residual < rank_tol;
    return rep;
}

struct CheckOptions {
    bool strict = false;
    double pairing_tol = 1e-8;
    double rotation_tol = 1e-6;
    double rank_tol = 1e-6;
    double distinct_tol = 1e-6;
};

struct ConsistencyReport {
    FundamentalReport fundamental;
    bool fundamental_ok = false;
    bool essential_ok = false;
    double eigenvalue_pairing_residual = 0;
    double block_rotation_residual = 0;
    SignConfiguration best_sign;
    bool strict_mode = false;
};

inline ConsistencyReport check_essential_consistency(
    const MultiviewEssential& E, const CheckOptions& opt = {}) {
    if (!E.fully_observed())
        throw IncompleteMatrixError("check_essential_consistency: missing blocks");
    ConsistencyReport rep;
    rep.strict_mode = opt.strict;
    rep.fundamental = check_fundamental_consistency(E, opt.rank_tol);
    rep.fundamental_ok = rep.fundamental.ok;

    SpectralForm f = spectral_form(E.M, opt.distinct_tol);
    rep.eigenvalue_pairing_residual =
        (f.sigma_plus + f.sigma_minus).cwiseAbs().maxCoeff();

    double best = -1;
    for (const auto& sign : all_sign_configurations()) {
        Eigen::MatrixXd V = std::sqrt(0.5) * (f.X + f.Y * sign.diag());
        double r = block_rotation_residual(V, opt.strict);
        if (best < 0 || r < best) {
            best = r;
            rep.best_sign = sign;
        }
    }
    rep.block_rotation_residual = best;
    rep.essential_ok = rep.fundamental_ok &&
                       rep.eigenvalue_pairing_residual <= opt.pairing_tol &&
                       best <= opt.rotation_tol;
    return rep;
}

struct RecoverOptions {
    bool strict = false;
    bool validate = true;
    double rotation_tol = 1e-6;
    double distinct_tol = 1e-6;
};

struct RecoveredPoses {
    std::vector<CameraPose> poses;
    double block_rotation_residual = 0;
    SignConfiguration sign;
};

// Euclidean (or scaled) pose recovery from an eigendecomposition: pick the
// sign configuration whose block-rotation candidate is best, remove the
// global sign, then read off rotations and translations per block. The
// result does not depend on the eigenvector column signs of the input form.
inline RecoveredPoses recover_poses_from(const SpectralForm& f,
                                         const RecoverOptions& opt = {}) {
    int n = static_cast<int>(f.X.rows()) / 3;

    RecoveredPoses out;
    double best = -1;
    SignConfiguration best_sign;
    for (const auto& sign : all_sign_configurations()) {
        Eigen::MatrixXd V = std::sqrt(0.5) * (f.X + f.Y * sign.diag());
        double r = block_rotation_residual(V, opt.strict);
        if (best < 0 || r < best) {
            best = r;
            best_sign = sign;
        }
    }
    if (opt.validate && best > opt.rotation_tol)
        throw NoValidSignError("recover_poses: no sign configuration yields "
                               "a block rotation matrix");
    out.block_rotation_residual = best;
    out.sign = best_sign;

    Mat3 Is = best_sign.diag();
    Eigen::MatrixXd V_hat = std::sqrt(0.5) * (f.X + f.Y * Is);
    Eigen::MatrixXd U_hat = std::sqrt(0.5) * (f.X - f.Y * Is);
    if (V_hat.topRows<3>().determinant() < 0) {
        V_hat = -V_hat;
        U_hat = -U_hat;
    }
    Eigen::MatrixXd U_bar = U_hat * f.sigma_plus.asDiagonal();

    out.poses.resize(n);
    for (int i = 0; i < n; ++i) {
        auto [Ri, si] = project_to_scaled_rotation(V_hat.block<3, 3>(3 * i, 0));
        Mat3 T_hat = Ri.transpose() * U_bar.block<3, 3>(3 * i, 0) / si;
        Mat3 A = 0.5 * (T_hat - T_hat.transpose());
        Vec3 t(A(2, 1), A(0, 2), A(1, 0));
        if (opt.strict) t /= double(n);
        out.poses[i] = {Ri.transpose(), t};
    }
    return out;
}

inline RecoveredPoses recover_poses(const MultiviewEssential& E,
                                    const RecoverOptions& opt = {}) {
    if (!E.fully_observed())
        throw IncompleteMatrixError("recover_poses: missing blocks");
    return recover_poses_from(spectral_form(E.M, opt.distinct_tol), opt);
}

struct CounterExample {
    MultiviewEssential E;
    ConsistencyReport report;
};

// Three essential blocks that assemble into a consistent 3-view fundamental
// matrix which is nevertheless not a consistent essential one. Draws are
// rejected until the failure margins are comfortably large.
inline CounterExample generate_counterexample(uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 256; ++attempt) {
        Mat3 R_star = rng.rotation();
        Mat3 R_star2 = rng.rotation();
        Mat3 M = R_star - R_star2;
        Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec3 sv = svd.singularValues();
        if (sv(1) < 0.05) continue;  // R* too close to R**, resample

        Vec3 t3 = sv(0) * svd.matrixU().col(0);
        Vec3 a = svd.matrixV().col(0);
        Vec3 t2 = t3 - sv(1) * svd.matrixU().col(1);
        Vec3 t1 = Vec3::Zero();
        Mat3 R2 = rng.rotation();
        Mat3 R3 = R_star2;

        Mat3 V1 = Mat3::Identity();
        Mat3 V2 = R2.transpose();
        Mat3 V3 = R3.transpose() + a * t3.transpose();
        if (std::abs(V3.determinant()) < 1e-3) continue;
        if (t2.norm() < 0.05 || (t1 - t2).norm() < 0.05) continue;

        MultiviewEssential E(3);
        E.set_block(0, 1, V1 * skew(t1 - t2) * V2.transpose());
        E.set_block(0, 2, V1 * skew(t1 - t3) * V3.transpose());
        E.set_block(1, 2, V2 * skew(t2 - t3) * V3.transpose());

        ConsistencyReport rep;
        try {
            rep = check_essential_consistency(E, {});
        } catch (const EigenvalueMultiplicityError&) {
            continue;
        }
        if (!rep.fundamental_ok || rep.essential_ok) continue;
        if (rep.eigenvalue_pairing_residual > 1e-8) continue;
        if (rep.block_rotation_residual < 0.05) continue;

        // every block must be a clean essential matrix
        bool blocks_ok = true;
        for (auto [i, j] : E.mask) {
            Eigen::JacobiSVD<Mat3> bs(E.block(i, j));
            const Vec3 bv = bs.singularValues();
            if ((bv(0) - bv(1)) / bv(0) > 1e-10 || bv(2) / bv(0) > 1e-10)
                blocks_ok = false;
        }
        if (!blocks_ok) continue;

        // no choice of relative rotations closes the triplet loop
        auto c01 = decompose_essential(E.block(0, 1));
        auto c12 = decompose_essential(E.block(1, 2));
        auto c02 = decompose_essential(E.block(0, 2));
        double min_loop = 1e300;
        for (const auto& a01 : c01)
            for (const auto& a12 : c12)
                for (const auto& a02 : c02) {
                    Mat3 loop = a01.R * a12.R * a02.R.transpose();
                    min_loop = std::min(min_loop,
                                        (loop - Mat3::Identity()).norm());
                }
        if (min_loop < 0.1) continue;

        return {std::move(E), rep};
    }
    throw Error("generate_counterexample: sampling budget exhausted");
}

}  // namespace essavg
