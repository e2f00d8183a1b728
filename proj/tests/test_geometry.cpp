#include <catch2/catch_amalgamated.hpp>

#include <essavg/essavg.hpp>

using namespace essavg;

namespace {

Rng& rng() {
    static Rng r(424242);
    return r;
}

}  // namespace

TEST_CASE("skew builds the cross-product matrix") {
    Vec3 v = rng().unit_vector() * 2.3;
    Vec3 w = rng().unit_vector();
    REQUIRE((skew(v) * w - v.cross(w)).norm() == 0.0);
    REQUIRE((skew(v) + skew(v).transpose()).norm() == 0.0);
    REQUIRE(unskew(skew(v)).isApprox(v, 1e-15));
}

TEST_CASE("unskew rejects non-antisymmetric input") {
    Mat3 M = Mat3::Identity();
    REQUIRE_THROWS_AS(unskew(M), AsymmetryError);
}

TEST_CASE("project_to_rotation") {
    Mat3 R = rng().rotation();
    REQUIRE(project_to_rotation(R).isApprox(R, 1e-12));

    Mat3 stretched = R * Vec3(2.0, 1.0, 0.5).asDiagonal();
    Mat3 P = project_to_rotation(stretched);
    REQUIRE(is_rotation(P));
    REQUIRE(P.isApprox(R, 1e-12));

    // works for inputs with a negative determinant too
    Mat3 flipped = R * Vec3(2.0, 1.0, -0.5).asDiagonal();
    REQUIRE(is_rotation(project_to_rotation(flipped)));
}

TEST_CASE("project_to_scaled_rotation recovers scale and sign") {
    Mat3 R = rng().rotation();
    auto [R1, s1] = project_to_scaled_rotation(2.5 * R);
    REQUIRE(s1 == Catch::Approx(2.5).margin(1e-12));
    REQUIRE(R1.isApprox(R, 1e-12));

    auto [R2, s2] = project_to_scaled_rotation(-2.5 * R);
    REQUIRE(s2 == Catch::Approx(-2.5).margin(1e-12));
    REQUIRE((s2 * R2).isApprox(-2.5 * R, 1e-12));
    REQUIRE(is_rotation(R2));

    Mat3 singular = Vec3(1.0, 1.0, 0.0).asDiagonal();
    REQUIRE_THROWS_AS(project_to_scaled_rotation(singular), SingularInputError);
}

TEST_CASE("axis_angle and rotation_angle") {
    Mat3 Rz = axis_angle(Vec3::UnitZ(), 0.7);
    Mat3 expect;
    expect << std::cos(0.7), -std::sin(0.7), 0,
              std::sin(0.7),  std::cos(0.7), 0,
              0, 0, 1;
    REQUIRE(Rz.isApprox(expect, 1e-15));
    REQUIRE(rotation_angle(Rz) == Catch::Approx(0.7).margin(1e-12));
    REQUIRE(rotation_angle_deg(Rz) ==
            Catch::Approx(0.7 * 180.0 / M_PI).margin(1e-10));

    // no precision floor for tiny angles
    Mat3 tiny = axis_angle(rng().unit_vector(), 1e-9);
    REQUIRE(rotation_angle(tiny) == Catch::Approx(1e-9).epsilon(1e-4));
    REQUIRE(rotation_angle(Mat3::Identity()) == 0.0);
}

TEST_CASE("relative_essential formula and degenerate input") {
    CameraPose a{rng().rotation(), Vec3(0.3, -1.0, 0.2)};
    CameraPose b{rng().rotation(), Vec3(-0.5, 0.4, 1.1)};
    Mat3 E = relative_essential(a, b);
    Mat3 direct = a.R.transpose() * (skew(a.c) - skew(b.c)) * b.R;
    REQUIRE(E.isApprox(direct, 1e-14));

    REQUIRE_THROWS_AS(relative_essential(a, a), CoincidentCentersError);
}

TEST_CASE("decompose_essential returns both configurations") {
    CameraPose a{rng().rotation(), Vec3(0.3, -1.0, 0.2)};
    CameraPose b{rng().rotation(), Vec3(-0.5, 0.4, 1.1)};
    Mat3 E = relative_essential(a, b);

    auto configs = decompose_essential(E);
    Mat3 En = E / E.norm();
    for (const auto& c : configs) {
        REQUIRE(is_rotation(c.R));
        REQUIRE(c.t_dir.norm() == Catch::Approx(1.0).margin(1e-12));
        Mat3 rebuilt = skew(c.t_dir) * c.R;
        REQUIRE((rebuilt / rebuilt.norm()).isApprox(En, 1e-9));
    }
    // the two solutions are genuinely different (twisted pair)
    REQUIRE((configs[0].R - configs[1].R).norm() > 0.1);

    REQUIRE_THROWS_AS(decompose_essential(Mat3::Identity()),
                      DegenerateEssentialError);
}

TEST_CASE("similarity algebra") {
    Similarity S{1.7, rng().rotation(), Vec3(0.1, -0.2, 0.4)};
    CameraPose p{rng().rotation(), Vec3(1.0, 2.0, -0.5)};

    CameraPose q = apply_similarity(S, p);
    CameraPose back = apply_similarity(inverse(S), q);
    REQUIRE(back.R.isApprox(p.R, 1e-12));
    REQUIRE(back.c.isApprox(p.c, 1e-12));

    Similarity T{0.4, rng().rotation(), Vec3(-1.0, 0.0, 2.0)};
    CameraPose via = apply_similarity(T, apply_similarity(S, p));
    CameraPose comp = apply_similarity(compose(T, S), p);
    REQUIRE(via.R.isApprox(comp.R, 1e-12));
    REQUIRE(via.c.isApprox(comp.c, 1e-12));
}

TEST_CASE("similarity_from_two_pose_pairs recovers an exact transform") {
    CameraPose p0{rng().rotation(), Vec3(0.0, 0.0, 0.0)};
    CameraPose p1{rng().rotation(), Vec3(1.0, 0.5, -0.3)};

    for (double s : {2.2, -1.4}) {
        Similarity S{s, rng().rotation(), Vec3(0.7, -0.1, 0.9)};
        Similarity got = similarity_from_two_pose_pairs(
            p0, p1, apply_similarity(S, p0), apply_similarity(S, p1));
        REQUIRE(got.s == Catch::Approx(S.s).margin(1e-12));
        REQUIRE(got.R.isApprox(S.R, 1e-12));
        REQUIRE(got.t.isApprox(S.t, 1e-12));
    }
}

TEST_CASE("similarity_from_two_pose_pairs error cases") {
    CameraPose p0{rng().rotation(), Vec3(0.0, 0.0, 0.0)};
    CameraPose p1{rng().rotation(), Vec3(1.0, 0.5, -0.3)};
    CameraPose q0 = p0, q1 = p1;

    REQUIRE_THROWS_AS(similarity_from_two_pose_pairs(p0, p0, q0, q1),
                      CollinearDegenerateError);

    // rotation estimates from the two cameras disagree by 90 degrees
    q1.R = axis_angle(Vec3::UnitZ(), M_PI / 2) * q1.R;
    REQUIRE_THROWS_AS(similarity_from_two_pose_pairs(p0, p1, q0, q1),
                      InconsistentPairError);
}
