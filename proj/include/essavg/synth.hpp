#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include "admm.hpp"
#include "cover.hpp"
#include "errors.hpp"
#include "registration.hpp"
#include "rng.hpp"

namespace essavg {

enum class Layout { ring, random_box, clustered };

struct SceneSpec {
    int n = 10;
    Layout layout = Layout::ring;
    double sigma_r = 0;            // rotation noise, radians
    double sigma_t = 0;            // translation-direction noise, radians
    bool randomize_scales = false; // random positive pairwise scales
    double outlier_fraction = 0;
    double missing_fraction = 0;
    double additive_sigma = 0;     // optional per-entry noise (stress mode)
    uint64_t seed = 0;
};

struct Scene {
    std::vector<CameraPose> poses;
    ViewingGraph graph;
};

namespace detail {

inline std::vector<Vec3> sample_centers(const SceneSpec& spec, Rng& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<Vec3> c(spec.n);
        switch (spec.layout) {
            case Layout::ring:
                for (int i = 0; i < spec.n; ++i) {
                    double ang = 2.0 * M_PI * i / spec.n;
                    c[i] = Vec3(std::cos(ang), std::sin(ang),
                                0.1 * rng.normal());
                }
                break;
            case Layout::random_box:
                for (int i = 0; i < spec.n; ++i)
                    c[i] = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                rng.uniform(-1, 1));
                break;
            case Layout::clustered:
                for (int i = 0; i < spec.n; ++i) {
                    Vec3 base(i % 2 ? 1.0 : -1.0, 0, 0);
                    c[i] = base + 0.35 * Vec3(rng.normal(), rng.normal(),
                                              rng.normal());
                }
                break;
        }
        bool ok = true;
        for (int i = 0; i < spec.n && ok; ++i)
            for (int j = i + 1; j < spec.n; ++j)
                if ((c[i] - c[j]).norm() < 1e-6) {
                    ok = false;
                    break;
                }
        if (ok) {
            Vec3 mean = Vec3::Zero();
            for (const auto& v : c) mean += v;
            mean /= double(spec.n);
            Eigen::MatrixXd C(spec.n, 3);
            for (int i = 0; i < spec.n; ++i)
                C.row(i) = (c[i] - mean).transpose();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
            if (svd.singularValues()(1) <
                1e-3 * std::max(svd.singularValues()(0), 1e-300))
                ok = false;
        }
        if (ok) return c;
    }
    throw LayoutDegenerateError("sample_centers: degenerate layout");
}

}  // namespace detail

// Deterministic synthetic scene: ground-truth poses plus a corrupted viewing
// graph. Noise perturbs relative poses so measurements stay exactly
// essential; additive_sigma optionally breaks that for stress tests.
inline Scene generate_scene(const SceneSpec& spec) {
    if (spec.n < 3 || spec.sigma_r < 0 || spec.sigma_t < 0 ||
        spec.outlier_fraction < 0 || spec.outlier_fraction >= 1 ||
        spec.missing_fraction < 0 || spec.missing_fraction >= 1 ||
        spec.additive_sigma < 0)
        throw InvalidInputError("generate_scene: invalid spec");
    Rng rng(spec.seed);

    Scene scene;
    auto centers = detail::sample_centers(spec, rng);
    scene.poses.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) scene.poses[i] = {rng.rotation(), centers[i]};

    std::vector<std::pair<int, int>> all_pairs;
    for (int i = 0; i < spec.n; ++i)
        for (int j = i + 1; j < spec.n; ++j) all_pairs.push_back({i, j});
    int remove = static_cast<int>(spec.missing_fraction * all_pairs.size());

    std::vector<std::pair<int, int>> kept = all_pairs;
    if (remove > 0) {
        bool connected = false;
        for (int attempt = 0; attempt < 200 && !connected; ++attempt) {
            kept = all_pairs;
            std::shuffle(kept.begin(), kept.end(), rng.engine());
            kept.resize(all_pairs.size() - remove);
            detail::UnionFind uf(spec.n);
            int joined = 0;
            for (auto [i, j] : kept) joined += uf.unite(i, j) ? 1 : 0;
            connected = joined == spec.n - 1;
        }
        if (!connected)
            throw InvalidInputError(
                "generate_scene: cannot keep graph connected at this "
                "missing fraction");
        std::sort(kept.begin(), kept.end());
    }

    int n_out = static_cast<int>(spec.outlier_fraction * kept.size());
    std::vector<int> outlier_idx;
    if (n_out > 0) {
        std::vector<int> order(kept.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng.engine());
        outlier_idx.assign(order.begin(), order.begin() + n_out);
        std::sort(outlier_idx.begin(), outlier_idx.end());
    }

    scene.graph.n = spec.n;
    for (size_t e = 0; e < kept.size(); ++e) {
        auto [i, j] = kept[e];
        const CameraPose &pi = scene.poses[i], &pj = scene.poses[j];
        Mat3 E_clean = relative_essential(pi, pj);

        Mat3 R_rel = pi.R.transpose() * pj.R;
        Vec3 t_rel = pi.R.transpose() * (pi.c - pj.c);
        double d = t_rel.norm();
        Mat3 Rn = R_rel * axis_angle(rng.unit_vector(), rng.normal(0, spec.sigma_r));
        // deflect the translation direction by exactly the drawn angle:
        // rotate about an axis perpendicular to it
        Vec3 that = t_rel / d;
        Vec3 ax = that.cross(rng.unit_vector());
        while (ax.norm() < 1e-12) ax = that.cross(rng.unit_vector());
        Vec3 tn = axis_angle(ax.normalized(), rng.normal(0, spec.sigma_t)) * that;
        Mat3 meas = skew(tn * d) * Rn;

        if (std::binary_search(outlier_idx.begin(), outlier_idx.end(),
                               static_cast<int>(e))) {
            CameraPose u1{rng.rotation(), Vec3(rng.uniform(-1, 1),
                                               rng.uniform(-1, 1),
                                               rng.uniform(-1, 1))};
            CameraPose u2{rng.rotation(), Vec3(rng.uniform(-1, 1),
                                               rng.uniform(-1, 1),
                                               rng.uniform(-1, 1))};
            while ((u1.c - u2.c).norm() < 1e-3)
                u2.c = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                            rng.uniform(-1, 1));
            meas = relative_essential(u1, u2);
        }
        if (spec.additive_sigma > 0)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    meas(r, c) += rng.normal(0, spec.additive_sigma);

        double dev = (meas / meas.norm() - E_clean / E_clean.norm()).norm();
        double w = 1.0 / (dev + 1e-3);
        scene.graph.edges.push_back({i, j, w, meas});
    }

    if (spec.randomize_scales) {
        Rng srng(spec.seed ^ 0x9e3779b97f4a7c15ull);
        for (auto& e : scene.graph.edges)
            e.E *= std::exp(srng.uniform(std::log(0.25), std::log(4.0)));
    }
    return scene;
}

struct PipelineConfig {
    CoverThresholds thresholds{};
    int tree_count = 2;
    AdmmConfig admm{};
};

struct BenchReport {
    double r_f_mean = 0, r_d_mean_deg = 0;
    double center_mean = 0, center_median = 0;
    double naive_r_f_mean = 0, naive_r_d_mean_deg = 0;
    double naive_center_mean = 0, naive_center_median = 0;
    int triplets_before = 0, triplets_after = 0;
    int covered_views = 0;
    int admm_iterations = 0;
    bool admm_converged = true;
    double final_primal = 0;
    double seconds_cover = 0, seconds_solve = 0, seconds_register = 0;
};

namespace detail {

inline std::map<int, CameraPose> decode(const MultiviewEssential& E,
                                        const TripletCover& cover) {
    std::vector<TripletPoses> locals(cover.triplets.size());
    RecoverOptions opt;
    opt.validate = false;  // solver output is only approximately consistent
    parallel_for(cover.triplets.size(), [&](size_t k) {
        const Triplet& t = cover.triplets[k];
        Eigen::Matrix<double, 9, 9> E9 = E.submatrix({t.i, t.j, t.k});
        locals[k] = extract_triplet_poses(E9, static_cast<int>(k), opt);
    });
    return stitch(cover, locals).poses;
}

}  // namespace detail

// Full chain (cover -> averaging -> registration -> metrics) plus an in-run
// baseline that decodes the raw measurements per triplet without averaging.
inline BenchReport run_pipeline(const Scene& scene,
                                const PipelineConfig& cfg = {}) {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    BenchReport rep;

    ViewingGraph G = scene.graph;
    for (auto& e : G.edges) e.E /= e.E.norm();

    auto t0 = clock::now();
    TripletCover cover = build_cover(G, cfg.thresholds, cfg.tree_count);
    auto t1 = clock::now();
    rep.seconds_cover = secs(t0, t1);
    rep.triplets_before = cover.pre_prune_count;
    rep.triplets_after = static_cast<int>(cover.triplets.size());
    rep.covered_views = static_cast<int>(cover.covered_views.size());

    MultiviewEssential E_hat(G.n);
    for (auto [i, j] : cover.pairs()) E_hat.set_block(i, j, G.measurement(i, j));

    AdmmResult solved;
    try {
        solved = essavg::solve(E_hat, cover, cfg.admm);
    } catch (const NotConvergedError& e) {
        solved = e.best;
    }
    auto t2 = clock::now();
    rep.seconds_solve = secs(t1, t2);
    rep.admm_iterations = solved.iterations;
    rep.admm_converged = solved.converged;
    if (!solved.trace.empty())
        rep.final_primal = std::max(solved.trace.back().max_primal_B,
                                    solved.trace.back().max_primal_D);

    auto est = detail::decode(solved.E, cover);
    auto naive = detail::decode(E_hat, cover);
    auto t3 = clock::now();
    rep.seconds_register = secs(t2, t3);

    AlignmentReport a = align_to_reference(est, scene.poses);
    rep.r_f_mean = a.r_f_mean;
    rep.r_d_mean_deg = a.r_d_mean_deg;
    rep.center_mean = a.center_mean;
    rep.center_median = a.center_median;

    AlignmentReport b = align_to_reference(naive, scene.poses);
    rep.naive_r_f_mean = b.r_f_mean;
    rep.naive_r_d_mean_deg = b.r_d_mean_deg;
    rep.naive_center_mean = b.center_mean;
    rep.naive_center_median = b.center_median;
    return rep;
}

}  // namespace essavg
