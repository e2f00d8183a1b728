#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace essavg {

struct GraphEdge {
    int i, j;        // i < j
    double weight;   // inlier-count proxy
    Mat3 E;          // measured E_ij
};

struct ViewingGraph {
    int n = 0;
    std::vector<GraphEdge> edges;

    const GraphEdge* find(int a, int b) const {
        int i = std::min(a, b), j = std::max(a, b);
        for (const auto& e : edges)
            if (e.i == i && e.j == j) return &e;
        return nullptr;
    }
    // Oriented measurement: E_ab = E_ba^T.
    Mat3 measurement(int a, int b) const {
        const GraphEdge* e = find(a, b);
        return a < b ? e->E : Mat3(e->E.transpose());
    }
};

struct Triplet {
    int i, j, k;  // i < j < k
    double collinearity = 0;             // radians
    double translation_consistency = 0;  // radians
    double rotation_consistency = 0;     // unitless
};

struct CoverThresholds {
    double min_collinearity = 0.17;     // radians
    double max_rotation = 1.1;          // unitless
    double max_translation = 1.0;       // radians
};

struct TripletCover {
    std::vector<Triplet> triplets;
    std::vector<std::pair<int, int>> triplet_edges;  // indices into triplets
    std::set<int> covered_views;
    int pre_prune_count = 0;
    int pre_prune_covered = 0;

    std::set<std::pair<int, int>> pairs() const {
        std::set<std::pair<int, int>> out;
        for (const auto& t : triplets) {
            out.insert({t.i, t.j});
            out.insert({t.i, t.k});
            out.insert({t.j, t.k});
        }
        return out;
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

inline double angle_between(const Vec3& u, const Vec3& v) {
    double c = u.dot(v) / (u.norm() * v.norm());
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// Interior triangle angles at i, j, k from the three center-difference
// directions t_ij = c_i - c_j etc., all expressed in one common frame.
inline std::array<double, 3> triangle_angles(const Vec3& t_ij, const Vec3& t_ik,
                                             const Vec3& t_jk) {
    return {angle_between(t_ij, t_ik), angle_between(t_ij, -t_jk),
            angle_between(t_ik, t_jk)};
}

}  // namespace detail

inline double collinearity_score(const Vec3& t_ij, const Vec3& t_ik,
                                 const Vec3& t_jk, double tol = 1e-12) {
    if (t_ij.norm() <= tol || t_ik.norm() <= tol || t_jk.norm() <= tol)
        throw ZeroTranslationError("collinearity_score: zero translation");
    auto th = detail::triangle_angles(t_ij, t_ik, t_jk);
    return std::min({th[0], th[1], th[2]});
}

inline double translation_consistency_score(double th_i, double th_j,
                                            double th_k) {
    return std::abs(th_i + th_j + th_k - M_PI);
}

inline double rotation_consistency_score(const Mat3& R_ij, const Mat3& R_jk,
                                         const Mat3& R_ki) {
    return (R_ij * R_jk * R_ki - Mat3::Identity()).norm();
}

// Scores one 3-clique from its measured essential matrices. Each measurement
// decomposes into two configurations; the combination with the best-closing
// rotation loop supplies the translations for the angle scores.
inline Triplet score_triplet(const ViewingGraph& G, int i, int j, int k) {
    auto cij = decompose_essential(G.measurement(i, j));
    auto cjk = decompose_essential(G.measurement(j, k));
    auto cik = decompose_essential(G.measurement(i, k));
    double best = -1;
    const PoseConfig *bij = nullptr, *bjk = nullptr, *bik = nullptr;
    for (const auto& a : cij)
        for (const auto& b : cjk)
            for (const auto& c : cik) {
                double r = rotation_consistency_score(a.R, b.R,
                                                      c.R.transpose());
                if (best < 0 || r < best) {
                    best = r;
                    bij = &a;
                    bjk = &b;
                    bik = &c;
                }
            }
    // t_ij, t_ik live in i's frame; bring t_jk over with R_ij.
    Vec3 t_jk_common = bij->R * bjk->t_dir;
    auto th = detail::triangle_angles(bij->t_dir, bik->t_dir, t_jk_common);
    Triplet t{i, j, k};
    t.rotation_consistency = best;
    t.collinearity = std::min({th[0], th[1], th[2]});
    t.translation_consistency = translation_consistency_score(th[0], th[1], th[2]);
    return t;
}

// Union of `count` edge-disjoint maximum-weight spanning trees; trees after
// the first may be partial forests. Ties broken by vertex indices.
inline std::set<std::pair<int, int>> select_spanning_trees(
    const ViewingGraph& G, int count) {
    std::vector<const GraphEdge*> sorted;
    for (const auto& e : G.edges) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(),
              [](const GraphEdge* a, const GraphEdge* b) {
                  if (a->weight != b->weight) return a->weight > b->weight;
                  return std::tie(a->i, a->j) < std::tie(b->i, b->j);
              });
    std::set<std::pair<int, int>> used;
    for (int pass = 0; pass < count; ++pass) {
        detail::UnionFind uf(G.n);
        int joined = 0;
        for (const GraphEdge* e : sorted) {
            if (used.count({e->i, e->j})) continue;
            if (uf.unite(e->i, e->j)) {
                used.insert({e->i, e->j});
                ++joined;
            }
        }
        if (pass == 0 && joined != G.n - 1)
            throw DisconnectedGraphError(
                "select_spanning_trees: graph is not connected");
    }
    return used;
}

namespace detail {

inline int shared_views(const Triplet& a, const Triplet& b) {
    std::array<int, 3> va{a.i, a.j, a.k}, vb{b.i, b.j, b.k};
    int c = 0;
    for (int x : va)
        for (int y : vb)
            if (x == y) ++c;
    return c;
}

inline std::set<int> coverage(const std::vector<Triplet>& ts,
                              const std::vector<char>& alive) {
    std::set<int> cov;
    for (size_t a = 0; a < ts.size(); ++a)
        if (alive[a]) {
            cov.insert(ts[a].i);
            cov.insert(ts[a].j);
            cov.insert(ts[a].k);
        }
    return cov;
}

inline int component_count(const std::vector<Triplet>& ts,
                           const std::vector<char>& alive) {
    int m = static_cast<int>(ts.size());
    UnionFind uf(m);
    int nodes = 0;
    for (int a = 0; a < m; ++a) {
        if (!alive[a]) continue;
        ++nodes;
        for (int b = a + 1; b < m; ++b)
            if (alive[b] && shared_views(ts[a], ts[b]) == 2) uf.unite(a, b);
    }
    if (nodes == 0) return 0;
    std::set<int> roots;
    for (int a = 0; a < m; ++a)
        if (alive[a]) roots.insert(uf.find(a));
    return static_cast<int>(roots.size());
}

}  // namespace detail

// Spanning-tree-seeded triplet selection with threshold filtering and greedy,
// connectivity-preserving pruning (worst rotation score first).
inline TripletCover build_cover(const ViewingGraph& G,
                                const CoverThresholds& th = {},
                                int tree_count = 2) {
    auto trees = select_spanning_trees(G, tree_count);
    std::set<std::pair<int, int>> present;
    for (const auto& e : G.edges) present.insert({e.i, e.j});

    std::vector<Triplet> cand;
    for (int i = 0; i < G.n; ++i)
        for (int j = i + 1; j < G.n; ++j)
            for (int k = j + 1; k < G.n; ++k) {
                std::array<std::pair<int, int>, 3> es{
                    std::pair{i, j}, std::pair{i, k}, std::pair{j, k}};
                if (!std::all_of(es.begin(), es.end(),
                                 [&](auto p) { return present.count(p); }))
                    continue;
                int in_tree = 0;
                for (auto p : es) in_tree += trees.count(p) ? 1 : 0;
                if (in_tree < 2) continue;
                Triplet t = score_triplet(G, i, j, k);
                if (t.collinearity < th.min_collinearity) continue;
                if (t.rotation_consistency > th.max_rotation) continue;
                if (t.translation_consistency > th.max_translation) continue;
                cand.push_back(t);
            }
    if (cand.empty())
        throw EmptyCoverError("build_cover: no triplet passes the thresholds");

    // keep the best connected component of the triplet graph
    int m = static_cast<int>(cand.size());
    detail::UnionFind uf(m);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            if (detail::shared_views(cand[a], cand[b]) == 2) uf.unite(a, b);
    std::map<int, std::vector<int>> comps;
    for (int a = 0; a < m; ++a) comps[uf.find(a)].push_back(a);
    const std::vector<int>* best_comp = nullptr;
    std::tuple<size_t, size_t, int> best_key;
    for (const auto& [root, members] : comps) {
        std::set<int> cov;
        for (int a : members) {
            cov.insert(cand[a].i);
            cov.insert(cand[a].j);
            cov.insert(cand[a].k);
        }
        std::tuple<size_t, size_t, int> key{cov.size(), members.size(),
                                            -members.front()};
        if (!best_comp || key > best_key) {
            best_comp = &members;
            best_key = key;
        }
    }
    std::vector<Triplet> kept;
    for (int a : *best_comp) kept.push_back(cand[a]);

    // greedy prune, single sweep, worst rotation score first
    int km = static_cast<int>(kept.size());
    std::vector<char> alive(km, 1);
    std::set<int> full_cov = detail::coverage(kept, alive);
    std::vector<int> order(km);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (kept[a].rotation_consistency != kept[b].rotation_consistency)
            return kept[a].rotation_consistency > kept[b].rotation_consistency;
        return a < b;
    });
    int alive_count = km;
    for (int idx : order) {
        if (alive_count == 1) break;
        alive[idx] = 0;
        bool ok = detail::coverage(kept, alive) == full_cov &&
                  detail::component_count(kept, alive) == 1;
        if (ok)
            --alive_count;
        else
            alive[idx] = 1;
    }

    TripletCover cover;
    cover.pre_prune_count = km;
    cover.pre_prune_covered = static_cast<int>(full_cov.size());
    for (int a = 0; a < km; ++a)
        if (alive[a]) cover.triplets.push_back(kept[a]);
    int fm = static_cast<int>(cover.triplets.size());
    for (int a = 0; a < fm; ++a)
        for (int b = a + 1; b < fm; ++b)
            if (detail::shared_views(cover.triplets[a], cover.triplets[b]) == 2)
                cover.triplet_edges.push_back({a, b});
    cover.covered_views = full_cov;
    return cover;
}

}  // namespace essavg
