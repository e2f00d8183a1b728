#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <vector>

#include "cover.hpp"
#include "errors.hpp"
#include "nview.hpp"

namespace essavg {

struct TripletPoses {
    int triplet_index = -1;
    std::array<CameraPose, 3> poses;  // local frame, ordered as the triplet
};

struct EdgeResidual {
    int from_triplet, to_triplet;
    double rotation;  // Frobenius disagreement over re-seen views
    double center;
};

struct GlobalReconstruction {
    std::map<int, CameraPose> poses;
    int anchor = -1;
    std::vector<EdgeResidual> residuals;
};

// Pose extraction for one solved 9x9 triplet block. The per-block scales of
// the scaled consistency model are absorbed during recovery, so the result
// reproduces the block up to pairwise scales and a similarity.
inline TripletPoses extract_triplet_poses(const Eigen::Matrix<double, 9, 9>& E9,
                                          int triplet_index = -1,
                                          const RecoverOptions& opt = {}) {
    MultiviewEssential E(3);
    E.set_block(0, 1, E9.block<3, 3>(0, 3));
    E.set_block(0, 2, E9.block<3, 3>(0, 6));
    E.set_block(1, 2, E9.block<3, 3>(3, 6));
    RecoveredPoses rec = recover_poses(E, opt);
    TripletPoses out;
    out.triplet_index = triplet_index;
    for (int i = 0; i < 3; ++i) out.poses[i] = rec.poses[i];
    return out;
}

namespace detail {

inline std::array<int, 3> views_of(const Triplet& t) { return {t.i, t.j, t.k}; }

}  // namespace detail

// Breadth-first similarity stitching over the triplet graph. The anchor is
// the most consistent triplet unless overridden; each new triplet is mapped
// onto the global frame through its two cameras shared with an already
// placed one. Views are assigned once; later disagreements are recorded per
// edge.
inline GlobalReconstruction stitch(const TripletCover& cover,
                                   const std::vector<TripletPoses>& locals,
                                   int anchor_override = -1) {
    int m = static_cast<int>(cover.triplets.size());
    GlobalReconstruction out;
    if (m == 0) throw EmptyCoverError("stitch: empty cover");

    int anchor = 0;
    if (anchor_override >= 0 && anchor_override < m) {
        anchor = anchor_override;
    } else {
        for (int k = 1; k < m; ++k)
            if (cover.triplets[k].rotation_consistency <
                cover.triplets[anchor].rotation_consistency)
                anchor = k;
    }
    out.anchor = anchor;

    std::vector<std::vector<int>> adj(m);
    for (auto [a, b] : cover.triplet_edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());

    auto place = [&](int k, const Similarity& S) {
        auto vs = detail::views_of(cover.triplets[k]);
        double rot = 0, cen = 0;
        for (int p = 0; p < 3; ++p) {
            CameraPose mapped = apply_similarity(S, locals[k].poses[p]);
            auto it = out.poses.find(vs[p]);
            if (it == out.poses.end()) {
                out.poses.emplace(vs[p], mapped);
            } else {
                rot = std::max(rot, (mapped.R - it->second.R).norm());
                cen = std::max(cen, (mapped.c - it->second.c).norm());
            }
        }
        return std::pair{rot, cen};
    };

    std::vector<char> placed(m, 0);
    placed[anchor] = 1;
    place(anchor, Similarity{});
    std::deque<int> queue{anchor};
    int placed_count = 1;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int nxt : adj[cur]) {
            if (placed[nxt]) continue;
            auto va = detail::views_of(cover.triplets[cur]);
            auto vb = detail::views_of(cover.triplets[nxt]);
            std::vector<int> shared;
            for (int x : vb)
                if (std::count(va.begin(), va.end(), x)) shared.push_back(x);
            // G_T edge: exactly two shared views, both already posed
            int s0 = shared[0], s1 = shared[1];
            auto local_of = [&](int view) {
                auto it = std::find(vb.begin(), vb.end(), view);
                return locals[nxt].poses[it - vb.begin()];
            };
            Similarity S;
            try {
                S = similarity_from_two_pose_pairs(local_of(s0), local_of(s1),
                                                   out.poses.at(s0),
                                                   out.poses.at(s1));
            } catch (const InconsistentPairError& e) {
                throw ConfigurationMismatchError(
                    "stitch: triplets " + std::to_string(cur) + " and " +
                    std::to_string(nxt) + " define different configurations (" +
                    e.what() + ")");
            }
            auto [rot, cen] = place(nxt, S);
            out.residuals.push_back({cur, nxt, rot, cen});
            placed[nxt] = 1;
            ++placed_count;
            queue.push_back(nxt);
        }
    }
    if (placed_count != m)
        throw EmptyCoverError("stitch: triplet graph is not connected");
    return out;
}

struct ViewError {
    int view;
    double r_f;        // Frobenius rotation error after alignment
    double r_d_deg;    // angular rotation error, degrees
    double center;     // center distance after alignment
};

struct AlignmentReport {
    Similarity similarity;  // maps estimate onto the reference
    std::vector<ViewError> per_view;
    double r_f_mean = 0, r_d_mean_deg = 0;
    double center_mean = 0, center_median = 0;
};

// L1 chordal median of rotations (Weiszfeld iteration).
inline Mat3 rotation_median(const std::vector<Mat3>& Rs) {
    Mat3 sum = Mat3::Zero();
    for (const auto& Q : Rs) sum += Q;
    Mat3 R = project_to_rotation(sum);
    for (int it = 0; it < 200; ++it) {
        Mat3 num = Mat3::Zero();
        for (const auto& Q : Rs) num += Q / std::max((Q - R).norm(), 1e-9);
        Mat3 Rn = project_to_rotation(num);
        if ((Rn - R).norm() < 1e-15) break;
        R = Rn;
    }
    return R;
}

namespace detail {

// Orthogonal Procrustes with signed scale; tries both scale signs so that
// negative-scale gauges (valid similarities here) align exactly.
inline Similarity fit_similarity_centers(const std::vector<Vec3>& src,
                                         const std::vector<Vec3>& dst) {
    size_t n = src.size();
    Vec3 sc = Vec3::Zero(), dc = Vec3::Zero();
    for (size_t i = 0; i < n; ++i) {
        sc += src[i];
        dc += dst[i];
    }
    sc /= double(n);
    dc /= double(n);
    Mat3 K = Mat3::Zero();
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        K += (dst[i] - dc) * (src[i] - sc).transpose();
        ss += (src[i] - sc).squaredNorm();
    }
    Similarity best;
    double best_err = -1;
    for (double flip : {1.0, -1.0}) {
        Mat3 R = project_to_rotation(flip * K);
        double s = 0;
        for (size_t i = 0; i < n; ++i)
            s += (dst[i] - dc).dot(R * (src[i] - sc));
        s /= std::max(ss, 1e-300);
        Vec3 t = dc - s * (R * sc);
        double err = 0;
        for (size_t i = 0; i < n; ++i)
            err += (s * (R * src[i]) + t - dst[i]).squaredNorm();
        if (best_err < 0 || err < best_err) {
            best_err = err;
            best = {s, R, t};
        }
    }
    return best;
}

}  // namespace detail

// Gauge-invariant error metrics: rotation errors through the L1-median gauge
// rotation, center errors through a best-fit similarity over the centers.
inline AlignmentReport align_to_reference(const std::map<int, CameraPose>& est,
                                          const std::vector<CameraPose>& ref) {
    std::vector<int> common;
    for (const auto& [v, p] : est)
        if (v >= 0 && v < static_cast<int>(ref.size())) common.push_back(v);
    if (common.size() < 3)
        throw InsufficientOverlapError("align_to_reference: fewer than 3 "
                                       "common views");
    Vec3 centroid = Vec3::Zero();
    for (int v : common) centroid += ref[v].c;
    centroid /= double(common.size());
    Eigen::MatrixXd C(common.size(), 3);
    for (size_t i = 0; i < common.size(); ++i)
        C.row(i) = (ref[common[i]].c - centroid).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> csvd(C);
    if (csvd.singularValues()(1) <=
        1e-8 * std::max(csvd.singularValues()(0), 1e-300))
        throw InsufficientOverlapError("align_to_reference: collinear overlap");

    std::vector<Mat3> gauges;
    for (int v : common)
        gauges.push_back(ref[v].R * est.at(v).R.transpose());
    Mat3 Rg = rotation_median(gauges);

    std::vector<Vec3> src, dst;
    for (int v : common) {
        src.push_back(est.at(v).c);
        dst.push_back(ref[v].c);
    }
    Similarity S = detail::fit_similarity_centers(src, dst);

    AlignmentReport rep;
    rep.similarity = S;
    std::vector<double> cerrs;
    for (int v : common) {
        Mat3 Ra = Rg * est.at(v).R;
        ViewError e;
        e.view = v;
        e.r_f = (Ra - ref[v].R).norm();
        e.r_d_deg = rotation_angle_deg(Ra * ref[v].R.transpose());
        e.center = (S.s * (S.R * est.at(v).c) + S.t - ref[v].c).norm();
        rep.per_view.push_back(e);
        rep.r_f_mean += e.r_f;
        rep.r_d_mean_deg += e.r_d_deg;
        rep.center_mean += e.center;
        cerrs.push_back(e.center);
    }
    double cnt = double(rep.per_view.size());
    rep.r_f_mean /= cnt;
    rep.r_d_mean_deg /= cnt;
    rep.center_mean /= cnt;
    std::sort(cerrs.begin(), cerrs.end());
    size_t mid = cerrs.size() / 2;
    rep.center_median = cerrs.size() % 2 ? cerrs[mid]
                                         : 0.5 * (cerrs[mid - 1] + cerrs[mid]);
    return rep;
}

}  // namespace essavg
