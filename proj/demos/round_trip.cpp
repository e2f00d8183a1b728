// Build the joint essential matrix of a random camera rig, validate it, and
// recover the cameras back from the matrix alone.
#include <essavg/essavg.hpp>

#include <cstdio>

using namespace essavg;

int main() {
    Rng rng(7);
    const int n = 6;

    std::vector<CameraPose> cams;
    Vec3 sum = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
        CameraPose p{rng.rotation(), rng.unit_vector() * (1.0 + 0.2 * i)};
        sum += p.c;
        cams.push_back(p);
    }
    for (auto& p : cams) p.c -= sum / n;  // center the rig

    MultiviewEssential E = build_from_poses(cams);
    std::printf("assembled %dx%d matrix from %d cameras\n", 3 * n, 3 * n, n);

    CheckOptions opt;
    opt.strict = true;
    ConsistencyReport rep = check_essential_consistency(E, opt);
    std::printf("consistency: %s  (pairing %.2e, block rotation %.2e)\n",
                rep.essential_ok ? "ok" : "FAILED",
                rep.eigenvalue_pairing_residual, rep.block_rotation_residual);

    RecoverOptions ropt;
    ropt.strict = true;
    RecoveredPoses rec = recover_poses(E, ropt);

    AlignmentReport align;
    {
        std::map<int, CameraPose> est;
        for (int i = 0; i < n; ++i) est[i] = rec.poses[i];
        align = align_to_reference(est, cams);
    }
    std::printf("recovered cameras, aligned by one similarity (scale %.6f):\n",
                align.similarity.s);
    for (const auto& v : align.per_view)
        std::printf("  view %d: rotation %.3e deg, center %.3e\n", v.view,
                    v.r_d_deg, v.center);
    std::printf("mean rotation error %.3e deg, mean center error %.3e\n",
                align.r_d_mean_deg, align.center_mean);
    return align.r_d_mean_deg < 1e-6 ? 0 : 1;
}
