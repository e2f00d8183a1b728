#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <utility>

#include "errors.hpp"

namespace essavg {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kOrthTol = 1e-8;

// Camera with world-to-camera rotation R and center c: a world point X maps
// to R^T (X - c) in the camera frame.
struct CameraPose {
    Mat3 R = Mat3::Identity();
    Vec3 c = Vec3::Zero();
};

// x -> s * R * x + t. Scale may be negative; see similarity_from_two_pose_pairs.
struct Similarity {
    double s = 1.0;
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
};

inline Mat3 skew(const Vec3& v) {
    Mat3 M;
    M << 0, -v(2), v(1),
         v(2), 0, -v(0),
         -v(1), v(0), 0;
    return M;
}

inline Vec3 unskew(const Mat3& M, double tol = 1e-9) {
    if ((M + M.transpose()).norm() > tol)
        throw AsymmetryError("unskew: matrix is not antisymmetric");
    Mat3 A = 0.5 * (M - M.transpose());
    return Vec3(A(2, 1), A(0, 2), A(1, 0));
}

inline bool is_rotation(const Mat3& R, double tol = kOrthTol) {
    return (R.transpose() * R - Mat3::Identity()).norm() <= tol &&
           R.determinant() > 0;
}

// Nearest rotation in Frobenius norm.
inline Mat3 project_to_rotation(const Mat3& M) {
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 U = svd.matrixU(), V = svd.matrixV();
    Mat3 D = Mat3::Identity();
    if ((U * V.transpose()).determinant() < 0) D(2, 2) = -1;
    return U * D * V.transpose();
}

// Removes the singular values: M ~ s*R with R proper, s the mean singular
// value, negated when needed to keep det(R) = +1.
inline std::pair<Mat3, double> project_to_scaled_rotation(const Mat3& M,
                                                          double tol = 1e-12) {
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    if (sv(2) <= tol * std::max(sv(0), 1.0))
        throw SingularInputError("project_to_scaled_rotation: singular input");
    Mat3 R = svd.matrixU() * svd.matrixV().transpose();
    double s = sv.mean();
    if (R.determinant() < 0) {
        R = -R;
        s = -s;
    }
    return {R, s};
}

inline Mat3 axis_angle(const Vec3& axis, double angle) {
    Mat3 K = skew(axis.normalized());
    return Mat3::Identity() + std::sin(angle) * K +
           (1.0 - std::cos(angle)) * (K * K);
}

inline double rotation_angle(const Mat3& R) {
    // atan2 form stays accurate near the identity, where acos loses digits
    Vec3 v(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    return std::atan2(0.5 * v.norm(), 0.5 * (R.trace() - 1.0));
}

inline double rotation_angle_deg(const Mat3& R) {
    return rotation_angle(R) * 180.0 / M_PI;
}

// E_ab = R_a^T ([t_a]x - [t_b]x) R_b; singular values (d, d, 0), d = |t_a - t_b|.
inline Mat3 relative_essential(const CameraPose& a, const CameraPose& b,
                               double tol = 1e-12) {
    Vec3 d = a.c - b.c;
    if (d.norm() <= tol)
        throw CoincidentCentersError("relative_essential: coincident centers");
    return a.R.transpose() * skew(d) * b.R;
}

// One of the two relative configurations encoded by an essential matrix with
// fixed sign: E ~ [t_dir]x * R up to positive scale.
struct PoseConfig {
    Mat3 R;
    Vec3 t_dir;
};

inline std::array<PoseConfig, 2> decompose_essential(const Mat3& E,
                                                     double tol = 1e-6) {
    Eigen::JacobiSVD<Mat3> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    if (sv(0) <= 0 || (sv(0) - sv(1)) > tol * sv(0) || sv(2) > tol * sv(0))
        throw DegenerateEssentialError(
            "decompose_essential: singular values not (s, s, 0)");
    Mat3 W;
    W << 0, -1, 0,
         1, 0, 0,
         0, 0, 1;
    const Mat3 U = svd.matrixU(), V = svd.matrixV();
    std::array<PoseConfig, 2> out;
    int found = 0;
    for (int wi = 0; wi < 2; ++wi) {
        Mat3 R = U * (wi == 0 ? W : Mat3(W.transpose())) * V.transpose();
        if (R.determinant() < 0) R = -R;
        for (int sgn : {1, -1}) {
            Vec3 t = sgn * U.col(2);
            if ((skew(t) * R).cwiseProduct(E).sum() > 0) {
                if (found < 2) out[found] = {R, t};
                ++found;
            }
        }
    }
    if (found != 2)
        throw DegenerateEssentialError(
            "decompose_essential: sign resolution failed");
    auto lex_less = [](const Mat3& A, const Mat3& B) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                if (A(r, c) < B(r, c)) return true;
                if (A(r, c) > B(r, c)) return false;
            }
        return false;
    };
    if (lex_less(out[1].R, out[0].R)) std::swap(out[0], out[1]);
    return out;
}

inline CameraPose apply_similarity(const Similarity& S, const CameraPose& p) {
    return {S.R * p.R, S.s * (S.R * p.c) + S.t};
}

inline Similarity inverse(const Similarity& S) {
    return {1.0 / S.s, S.R.transpose(), -(1.0 / S.s) * (S.R.transpose() * S.t)};
}

// compose(S2, S1) applies S1 first.
inline Similarity compose(const Similarity& S2, const Similarity& S1) {
    return {S2.s * S1.s, S2.R * S1.R, S2.s * (S2.R * S1.t) + S2.t};
}

// Unique similarity mapping two source poses onto two destination poses.
// Both pose pairs independently determine the rotation; disagreement beyond
// max_rotation_gap means the pairs come from different configurations.
inline Similarity similarity_from_two_pose_pairs(
    const CameraPose& src0, const CameraPose& src1, const CameraPose& dst0,
    const CameraPose& dst1, double max_rotation_gap = M_PI / 4,
    double tol = 1e-12) {
    Vec3 ds = src1.c - src0.c, dd = dst1.c - dst0.c;
    if (ds.norm() <= tol || dd.norm() <= tol)
        throw CollinearDegenerateError(
            "similarity_from_two_pose_pairs: coincident centers");
    Mat3 R0 = dst0.R * src0.R.transpose();
    Mat3 R1 = dst1.R * src1.R.transpose();
    if (rotation_angle(R0.transpose() * R1) > max_rotation_gap)
        throw InconsistentPairError(
            "similarity_from_two_pose_pairs: rotation estimates disagree");
    Mat3 Rg = project_to_rotation(R0 + R1);
    double s = (Rg * ds).dot(dd) / ds.squaredNorm();
    Vec3 t = dst0.c - s * (Rg * src0.c);
    return {s, Rg, t};
}

}  // namespace essavg
