#pragma once

#include <cstdint>
#include <random>

#include "geometry.hpp"

namespace essavg {

// Deterministic source for all randomized fixtures and scenes.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }

    Vec3 unit_vector() {
        Vec3 v;
        do {
            v = Vec3(normal(), normal(), normal());
        } while (v.norm() < 1e-9);
        return v.normalized();
    }

    // Uniform on SO(3) via normalized quaternion.
    Mat3 rotation() {
        Eigen::Vector4d q(normal(), normal(), normal(), normal());
        q.normalize();
        double w = q(0), x = q(1), y = q(2), z = q(3);
        Mat3 R;
        R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
             2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
             2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
        return R;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace essavg
