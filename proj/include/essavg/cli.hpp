#pragma once

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "admm.hpp"
#include "cover.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "nview.hpp"
#include "registration.hpp"
#include "synth.hpp"

namespace essavg::cli {

enum ExitCode {
    OK = 0,
    CHECK_FAILED = 2,
    NOT_CONVERGED = 3,
    IO_ERROR = 4,
    USAGE = 5,
    INVALID_INPUT = 6,
};

namespace detail {

inline void print_report(std::ostream& out, const ConsistencyReport& rep,
                         int n, const CheckOptions& opt) {
    out << "mode " << (rep.strict_mode ? "strict" : "scaled") << "\n";
    out << "n " << n << "\n";
    out << "fundamental_ok " << int(rep.fundamental_ok) << "\n";
    out << "rank6_residual " << essavg::detail::fmt(rep.fundamental.rank6_residual)
        << "\n";
    out << "positive_eigenvalues " << rep.fundamental.positive_eigenvalues << "\n";
    out << "negative_eigenvalues " << rep.fundamental.negative_eigenvalues << "\n";
    out << "block_row_rank_support "
        << essavg::detail::fmt(rep.fundamental.block_row_rank_support) << "\n";
    out << "block_rank2_residual "
        << essavg::detail::fmt(rep.fundamental.block_rank2_residual) << "\n";
    out << "pairing_residual "
        << essavg::detail::fmt(rep.eigenvalue_pairing_residual) << "\n";
    out << "pairing_ok "
        << int(rep.eigenvalue_pairing_residual <= opt.pairing_tol) << "\n";
    out << "block_rotation_residual "
        << essavg::detail::fmt(rep.block_rotation_residual) << "\n";
    out << "best_sign " << rep.best_sign.s[0] << " " << rep.best_sign.s[1]
        << " " << rep.best_sign.s[2] << "\n";
    out << "essential_ok " << int(rep.essential_ok) << "\n";
}

inline void validate_blocks(const MeasurementFile& f) {
    for (const auto& r : f.records) {
        Eigen::JacobiSVD<Mat3> svd(r.E);
        const Vec3 sv = svd.singularValues();
        double s1 = std::max(sv(0), 1e-300);
        if ((sv(0) - sv(1)) / s1 > 1e-6 || sv(2) / s1 > 1e-6)
            throw InvalidInputError("block (" + std::to_string(r.i) + "," +
                                    std::to_string(r.j) +
                                    ") is not an essential matrix");
    }
}

inline PoseFile pose_file_from(const std::map<int, CameraPose>& poses, int n) {
    PoseFile f;
    f.n = n;
    for (const auto& [v, p] : poses) f.records.push_back({v, p});
    return f;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
    CLI::App app{"multiview essential matrix toolbox"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread count");

    // synth
    SceneSpec spec;
    std::string layout_name = "ring";
    std::string out_meas, out_poses;
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--n", spec.n, "view count");
    synth->add_option("--layout", layout_name, "ring|box|clustered");
    synth->add_option("--sigma-r", spec.sigma_r, "rotation noise (rad)");
    synth->add_option("--sigma-t", spec.sigma_t, "translation noise (rad)");
    synth->add_option("--missing", spec.missing_fraction, "missing pair fraction");
    synth->add_option("--outliers", spec.outlier_fraction, "outlier fraction");
    synth->add_flag("--scales", spec.randomize_scales, "random pairwise scales");
    synth->add_option("--additive-sigma", spec.additive_sigma,
                      "per-entry noise (stress mode)");
    synth->add_option("--seed", spec.seed, "random seed");
    synth->add_option("--out-measurements", out_meas, "measurement file")
        ->required();
    synth->add_option("--out-poses", out_poses, "ground-truth pose file")
        ->required();

    // check
    std::string check_file, check_mode = "scaled";
    auto* check = app.add_subcommand("check", "consistency checks");
    check->add_option("file", check_file, "measurement file")->required();
    check->add_option("--mode", check_mode, "strict|scaled");

    // average
    std::string avg_meas, avg_out, avg_trace;
    CoverThresholds thresholds;
    int tree_count = 2;
    AdmmConfig acfg;
    auto* average = app.add_subcommand("average", "run the averaging pipeline");
    average->add_option("--measurements", avg_meas)->required();
    average->add_option("--out-poses", avg_out)->required();
    average->add_option("--out-trace", avg_trace, "convergence trace file");
    average->add_option("--min-collinearity", thresholds.min_collinearity);
    average->add_option("--max-rotation", thresholds.max_rotation);
    average->add_option("--max-translation", thresholds.max_translation);
    average->add_option("--trees", tree_count, "disjoint spanning trees");
    average->add_option("--alpha1", acfg.alpha1);
    average->add_option("--alpha2", acfg.alpha2);
    average->add_option("--max-iters", acfg.max_outer_iters);
    average->add_option("--tol", acfg.outer_tol);
    average->add_option("--primal-tol", acfg.primal_tol);
    average->add_option("--inner-iters", acfg.inner_D_max_iters);
    average->add_option("--inner-tol", acfg.inner_D_tol);

    // recover
    std::string rec_file, rec_out, rec_mode = "scaled";
    auto* recover = app.add_subcommand("recover",
                                       "poses from one consistent matrix");
    recover->add_option("file", rec_file, "measurement file")->required();
    recover->add_option("--out-poses", rec_out)->required();
    recover->add_option("--mode", rec_mode, "strict|scaled");

    // eval
    std::string eval_est, eval_ref;
    auto* eval = app.add_subcommand("eval", "compare pose files");
    eval->add_option("--est", eval_est)->required();
    eval->add_option("--ref", eval_ref)->required();

    // counterexample
    uint64_t ce_seed = 0;
    std::string ce_out;
    auto* ce = app.add_subcommand("counterexample",
                                  "fundamental-but-not-essential fixture");
    ce->add_option("--seed", ce_seed);
    ce->add_option("--out", ce_out, "measurement file")->required();

    std::vector<const char*> argv;
    argv.push_back("essavg");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return OK;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return USAGE;
    }
    if (threads > 0) {
        setenv("ESSAVG_THREADS", std::to_string(threads).c_str(), 1);
    }

    try {
        if (*synth) {
            if (layout_name == "ring")
                spec.layout = Layout::ring;
            else if (layout_name == "box")
                spec.layout = Layout::random_box;
            else if (layout_name == "clustered")
                spec.layout = Layout::clustered;
            else
                throw InvalidInputError("unknown layout " + layout_name);
            Scene scene;
            try {
                scene = generate_scene(spec);
            } catch (const InvalidInputError& e) {
                err << e.what() << "\n";
                return USAGE;
            }
            write_measurements(out_meas, measurements_from_graph(scene.graph));
            PoseFile pf;
            pf.n = spec.n;
            for (int v = 0; v < spec.n; ++v)
                pf.records.push_back({v, scene.poses[v]});
            write_poses(out_poses, pf);
            out << "views " << spec.n << "\n";
            out << "measurements " << scene.graph.edges.size() << "\n";
            return OK;
        }

        if (*check) {
            if (check_mode != "strict" && check_mode != "scaled")
                throw InvalidInputError("unknown mode " + check_mode);
            MeasurementFile f = read_measurements(check_file);
            detail::validate_blocks(f);
            MultiviewEssential E = to_multiview(f);
            CheckOptions opt;
            opt.strict = check_mode == "strict";
            ConsistencyReport rep = check_essential_consistency(E, opt);
            detail::print_report(out, rep, E.n, opt);
            return rep.essential_ok ? OK : CHECK_FAILED;
        }

        if (*average) {
            MeasurementFile f = read_measurements(avg_meas);
            ViewingGraph G = to_viewing_graph(f);
            for (auto& e : G.edges) {
                if (e.E.norm() <= 0)
                    throw InvalidInputError("zero measurement block");
                e.E /= e.E.norm();
            }
            TripletCover cover = build_cover(G, thresholds, tree_count);
            MultiviewEssential E_hat(G.n);
            for (auto [i, j] : cover.pairs())
                E_hat.set_block(i, j, G.measurement(i, j));
            AdmmResult solved;
            bool converged = true;
            try {
                solved = essavg::solve(E_hat, cover, acfg);
            } catch (const NotConvergedError& e) {
                solved = e.best;
                converged = false;
            }
            auto poses = essavg::detail::decode(solved.E, cover);
            write_poses(avg_out, detail::pose_file_from(poses, G.n));
            if (!avg_trace.empty()) {
                std::ostringstream t;
                t << "iter objective primal_B primal_D rel_change skipped\n";
                for (const auto& r : solved.trace)
                    t << r.iteration << " " << essavg::detail::fmt(r.objective)
                      << " " << essavg::detail::fmt(r.max_primal_B) << " "
                      << essavg::detail::fmt(r.max_primal_D) << " "
                      << essavg::detail::fmt(r.rel_change) << " " << r.skipped
                      << "\n";
                essavg::detail::atomic_write(avg_trace, t.str());
            }
            out << "triplets " << cover.triplets.size() << "\n";
            out << "covered_views " << cover.covered_views.size() << "\n";
            out << "iterations " << solved.iterations << "\n";
            out << "converged " << int(converged) << "\n";
            return converged ? OK : NOT_CONVERGED;
        }

        if (*recover) {
            if (rec_mode != "strict" && rec_mode != "scaled")
                throw InvalidInputError("unknown mode " + rec_mode);
            MeasurementFile f = read_measurements(rec_file);
            MultiviewEssential E = to_multiview(f);
            RecoverOptions opt;
            opt.strict = rec_mode == "strict";
            RecoveredPoses rec;
            try {
                rec = recover_poses(E, opt);
            } catch (const NoValidSignError& e) {
                err << e.what() << "\n";
                return CHECK_FAILED;
            }
            PoseFile pf;
            pf.n = E.n;
            for (int v = 0; v < E.n; ++v) pf.records.push_back({v, rec.poses[v]});
            write_poses(rec_out, pf);
            out << "block_rotation_residual "
                << essavg::detail::fmt(rec.block_rotation_residual) << "\n";
            return OK;
        }

        if (*eval) {
            PoseFile fe = read_poses(eval_est);
            PoseFile fr = read_poses(eval_ref);
            std::vector<CameraPose> ref(fr.n);
            std::set<int> have;
            for (const auto& r : fr.records) {
                ref[r.view] = r.pose;
                have.insert(r.view);
            }
            std::map<int, CameraPose> est;
            for (const auto& r : fe.records)
                if (have.count(r.view)) est[r.view] = r.pose;
            AlignmentReport rep = align_to_reference(est, ref);
            out << "views " << rep.per_view.size() << "\n";
            out << "r_f_mean " << essavg::detail::fmt(rep.r_f_mean) << "\n";
            out << "r_d_mean_deg " << essavg::detail::fmt(rep.r_d_mean_deg)
                << "\n";
            out << "center_mean " << essavg::detail::fmt(rep.center_mean) << "\n";
            out << "center_median " << essavg::detail::fmt(rep.center_median)
                << "\n";
            out << "scale " << essavg::detail::fmt(rep.similarity.s) << "\n";
            return OK;
        }

        if (*ce) {
            CounterExample cex = generate_counterexample(ce_seed);
            write_measurements(ce_out, measurements_from_multiview(cex.E));
            detail::print_report(out, cex.report, cex.E.n, CheckOptions{});
            return OK;
        }
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return IO_ERROR;
    } catch (const InvalidInputError& e) {
        err << e.what() << "\n";
        return INVALID_INPUT;
    } catch (const IncompleteMatrixError& e) {
        err << e.what() << "\n";
        return INVALID_INPUT;
    } catch (const EigenvalueMultiplicityError& e) {
        err << e.what() << "\n";
        return INVALID_INPUT;
    } catch (const DisconnectedGraphError& e) {
        err << e.what() << "\n";
        return INVALID_INPUT;
    } catch (const EmptyCoverError& e) {
        err << e.what() << "\n";
        return INVALID_INPUT;
    } catch (const InsufficientOverlapError& e) {
        err << e.what() << "\n";
        return INVALID_INPUT;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return CHECK_FAILED;
    }
    return USAGE;
}

}  // namespace essavg::cli
