#include <catch2/catch_amalgamated.hpp>

#include <essavg/essavg.hpp>

using namespace essavg;

namespace {

// random rig with centered, non-collinear camera centers
std::vector<CameraPose> random_rig(int n, uint64_t seed) {
    Rng rng(seed);
    while (true) {
        std::vector<CameraPose> poses;
        Vec3 sum = Vec3::Zero();
        for (int i = 0; i < n; ++i) {
            Vec3 c(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            poses.push_back({rng.rotation(), c});
            sum += c;
        }
        for (auto& p : poses) p.c -= sum / n;
        Eigen::MatrixXd C(n, 3);
        for (int i = 0; i < n; ++i) C.row(i) = poses[i].c.transpose();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
        if (svd.singularValues()(1) > 0.1 * svd.singularValues()(0))
            return poses;
    }
}

}  // namespace

TEST_CASE("build_from_poses structure") {
    auto poses = random_rig(5, 11);
    MultiviewEssential E = build_from_poses(poses);

    REQUIRE(E.n == 5);
    REQUIRE(E.fully_observed());
    REQUIRE((E.M - E.M.transpose()).norm() == 0.0);
    for (int i = 0; i < 5; ++i) REQUIRE(E.block(i, i).norm() == 0.0);
    REQUIRE(E.block(1, 3).isApprox(
        relative_essential(poses[1], poses[3]), 1e-15));

    std::set<std::pair<int, int>> some{{0, 1}, {1, 2}};
    MultiviewEssential partial = build_from_poses(poses, &some);
    REQUIRE(partial.observed(0, 1));
    REQUIRE_FALSE(partial.observed(0, 2));
    REQUIRE_FALSE(partial.fully_observed());
}

TEST_CASE("axis-aligned identity rig hits an eigenvalue multiplicity") {
    // three identity rotations with centers e1, e2, e3: the spectrum is
    // {-sqrt6, -sqrt3, -sqrt3, 0, 0, 0, sqrt3, sqrt3, sqrt6}
    std::vector<CameraPose> poses = {
        {Mat3::Identity(), Vec3::UnitX()},
        {Mat3::Identity(), Vec3::UnitY()},
        {Mat3::Identity(), Vec3::UnitZ()},
    };
    MultiviewEssential E = build_from_poses(poses);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.M);
    const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
    std::array<double, 9> expect{-s6, -s3, -s3, 0, 0, 0, s3, s3, s6};
    for (int k = 0; k < 9; ++k)
        REQUIRE(es.eigenvalues()(k) == Catch::Approx(expect[k]).margin(1e-12));

    REQUIRE_THROWS_AS(spectral_form(E.M), EigenvalueMultiplicityError);
}

TEST_CASE("generic rig has distinct nonzero eigenvalues") {
    MultiviewEssential E = build_from_poses(random_rig(4, 21));
    REQUIRE_NOTHROW(spectral_form(E.M));
}

TEST_CASE("spectral_form contract on a consistent matrix") {
    MultiviewEssential E = build_from_poses(random_rig(6, 31));
    SpectralForm f = spectral_form(E.M);

    REQUIRE((f.X.transpose() * f.X - Mat3::Identity()).norm() < 1e-12);
    REQUIRE((f.Y.transpose() * f.Y - Mat3::Identity()).norm() < 1e-12);
    REQUIRE(f.sigma_plus(0) >= f.sigma_plus(1));
    REQUIRE(f.sigma_plus(1) >= f.sigma_plus(2));
    REQUIRE(f.sigma_minus(0) <= f.sigma_minus(1));
    REQUIRE((f.sigma_plus + f.sigma_minus).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((f.reassemble() - E.M).norm() < 1e-11);
}

TEST_CASE("svd and spectral forms map into each other") {
    MultiviewEssential E = build_from_poses(random_rig(5, 41));
    SpectralForm f = spectral_form(E.M);

    SvdForm g = spectral_to_svd(f);
    REQUIRE((g.reassemble() - E.M).norm() < 1e-11);

    SpectralForm f2 = svd_to_spectral(g);
    REQUIRE((f2.reassemble() - E.M).norm() < 1e-11);
    REQUIRE((f2.X - f.X).norm() < 1e-11);
    REQUIRE((f2.Y - f.Y).norm() < 1e-11);

    SpectralForm broken = f;
    broken.sigma_minus(1) *= 1.5;
    REQUIRE_THROWS_AS(spectral_to_svd(broken), PairingError);
}

TEST_CASE("block_rotation_residual semantics") {
    Rng rng(51);
    int n = 4;
    Eigen::MatrixXd V(3 * n, 3);

    // stacked rotations scaled by a common 1/sqrt(n): strict and scaled zero
    for (int i = 0; i < n; ++i)
        V.block<3, 3>(3 * i, 0) = rng.rotation() / std::sqrt(double(n));
    REQUIRE(block_rotation_residual(V, true) < 1e-12);
    REQUIRE(block_rotation_residual(V, false) < 1e-12);

    // per-block scales: scaled mode forgives, strict does not
    for (int i = 0; i < n; ++i) V.block<3, 3>(3 * i, 0) *= (1.0 + 0.3 * i);
    REQUIRE(block_rotation_residual(V, false) < 1e-12);
    REQUIRE(block_rotation_residual(V, true) > 0.1);
}

TEST_CASE("block_rotation_score peaks at the block count") {
    MultiviewEssential E = build_from_poses(random_rig(3, 61));
    SpectralForm f = spectral_form(E.M);
    double best = -1;
    for (const auto& sign : all_sign_configurations())
        best = std::max(best, block_rotation_score(f.X, f.Y, sign));
    REQUIRE(best == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("consistency checks pass on built matrices") {
    MultiviewEssential E = build_from_poses(random_rig(7, 71));

    CheckOptions strict;
    strict.strict = true;
    ConsistencyReport rep = check_essential_consistency(E, strict);
    REQUIRE(rep.fundamental_ok);
    REQUIRE(rep.essential_ok);
    REQUIRE(rep.eigenvalue_pairing_residual < 1e-10);
    REQUIRE(rep.block_rotation_residual < 1e-8);
    REQUIRE(rep.fundamental.positive_eigenvalues == 3);
    REQUIRE(rep.fundamental.negative_eigenvalues == 3);

    ConsistencyReport scaled = check_essential_consistency(E, {});
    REQUIRE(scaled.essential_ok);
}

TEST_CASE("per-view congruence scaling is a scaled consistency") {
    auto poses = random_rig(5, 81);
    MultiviewEssential E = build_from_poses(poses);
    Rng rng(82);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(15, 15);
    for (int i = 0; i < 5; ++i)
        D.block<3, 3>(3 * i, 3 * i) =
            rng.uniform(0.5, 2.0) * Mat3::Identity();
    MultiviewEssential S(5);
    Eigen::MatrixXd M = D * E.M * D;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) S.set_block(i, j, M.block<3, 3>(3 * i, 3 * j));

    REQUIRE(check_essential_consistency(S, {}).essential_ok);
    CheckOptions strict;
    strict.strict = true;
    REQUIRE_FALSE(check_essential_consistency(S, strict).essential_ok);
}

TEST_CASE("strict recovery round trip") {
    auto poses = random_rig(6, 91);
    MultiviewEssential E = build_from_poses(poses);

    RecoverOptions opt;
    opt.strict = true;
    RecoveredPoses rec = recover_poses(E, opt);
    REQUIRE(rec.block_rotation_residual < 1e-8);

    std::map<int, CameraPose> est;
    for (int i = 0; i < 6; ++i) est[i] = rec.poses[i];
    AlignmentReport align = align_to_reference(est, poses);
    REQUIRE(align.r_d_mean_deg < 1e-7);
    REQUIRE(align.center_mean < 1e-9);

    // the rebuilt matrix agrees with the input
    MultiviewEssential back = build_from_poses(rec.poses);
    REQUIRE((back.M - E.M).norm() < 1e-9 * E.M.norm());
}

TEST_CASE("recovery ignores eigenvector column signs") {
    auto poses = random_rig(5, 101);
    MultiviewEssential E = build_from_poses(poses);
    SpectralForm f = spectral_form(E.M);

    RecoveredPoses a = recover_poses_from(f);
    Rng rng(102);
    SpectralForm g = f;
    for (int k = 0; k < 3; ++k) {
        if (rng.uniform(0, 1) < 0.5) g.X.col(k) *= -1.0;
        if (rng.uniform(0, 1) < 0.5) g.Y.col(k) *= -1.0;
    }
    g.Y.col(1) *= -1.0;  // force at least one flip
    RecoveredPoses b = recover_poses_from(g);

    std::map<int, CameraPose> est;
    for (int i = 0; i < 5; ++i) est[i] = b.poses[i];
    std::vector<CameraPose> ref = a.poses;
    AlignmentReport align = align_to_reference(est, ref);
    REQUIRE(align.r_d_mean_deg < 1e-8);
    REQUIRE(align.center_mean < 1e-10);
}

TEST_CASE("recovery rejects inconsistent input when validating") {
    CounterExample ce = generate_counterexample(3);
    REQUIRE_THROWS_AS(recover_poses(ce.E), NoValidSignError);

    RecoverOptions opt;
    opt.validate = false;
    REQUIRE_NOTHROW(recover_poses(ce.E, opt));
}

TEST_CASE("checks demand a full observation mask") {
    auto poses = random_rig(4, 111);
    std::set<std::pair<int, int>> some{{0, 1}, {1, 2}, {2, 3}};
    MultiviewEssential E = build_from_poses(poses, &some);
    REQUIRE_THROWS_AS(check_essential_consistency(E, {}), IncompleteMatrixError);
    REQUIRE_THROWS_AS(recover_poses(E), IncompleteMatrixError);
}

TEST_CASE("counter-examples separate the two consistency levels") {
    for (uint64_t seed : {1, 2, 3}) {
        CounterExample ce = generate_counterexample(seed);
        REQUIRE(ce.report.fundamental_ok);
        REQUIRE_FALSE(ce.report.essential_ok);
        REQUIRE(ce.report.eigenvalue_pairing_residual < 1e-8);
        REQUIRE(ce.report.block_rotation_residual > 0.01);
        // every block on its own is a clean essential matrix
        for (auto [i, j] : ce.E.mask) {
            Eigen::JacobiSVD<Mat3> svd(ce.E.block(i, j));
            const Vec3 sv = svd.singularValues();
            REQUIRE((sv(0) - sv(1)) / sv(0) < 1e-9);
            REQUIRE(sv(2) / sv(0) < 1e-9);
        }
    }
}

TEST_CASE("consistent matrices split as E = UV' + VU'") {
    auto poses = random_rig(5, 121);
    MultiviewEssential E = build_from_poses(poses);

    Eigen::MatrixXd U(15, 3), V(15, 3);
    for (int i = 0; i < 5; ++i) {
        V.block<3, 3>(3 * i, 0) = poses[i].R.transpose();
        U.block<3, 3>(3 * i, 0) = poses[i].R.transpose() * skew(poses[i].c);
    }
    REQUIRE((V.transpose() * U).norm() < 1e-9);
    Eigen::MatrixXd A = U * V.transpose();
    REQUIRE((A + A.transpose() - E.M).norm() < 1e-12 * E.M.norm());
}
