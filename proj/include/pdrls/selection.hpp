#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/rng.hpp"

namespace pdrls {

/// Contiguous partition of {0..m-1} into ceil(m/l) blocks of size l (the
/// last block is the remainder when l does not divide m).
struct Partition {
    int m = 0;
    int l = 0;
    std::vector<std::vector<int>> blocks;

    int n_blocks() const { return static_cast<int>(blocks.size()); }
};

/// Pre: 1 <= l <= m.
Partition build_partition(int m, int l);

enum class SchemeKind {
    sequential,     // round-robin over partition blocks, shared by all nodes
    stochastic,     // per-node uniformly random partition block
    uniform_subset, // per-node uniformly random l-subset of {0..m-1}
};

struct SelectionScheme {
    SchemeKind kind = SchemeKind::sequential;
    int m = 0;
    int l = 0;
    Partition partition; // unused by uniform_subset
};

SelectionScheme make_scheme(SchemeKind kind, int m, int l);

/// 0/1 diagonal of one entry-selection matrix.
struct SelectionMask {
    Eigen::VectorXi diag;

    int count() const { return diag.sum(); }
    bool selected(int t) const { return diag(t) != 0; }
    std::vector<int> indices() const;
};

/// Mask for the given node at the given iteration.  The sequential kind is a
/// pure function of the iteration (identical across nodes, consumes no
/// randomness); the random kinds consume a fixed number of draws from rng.
SelectionMask select_entries(const SelectionScheme& scheme, long iteration,
                             Rng& rng);

/// Uniformly random l-subset of {0..m-1} via partial Fisher-Yates;
/// exactly l index draws.
SelectionMask draw_uniform_subset(int m, int l, Rng& rng);

/// Long-run fraction of entries transmitted per link per iteration: l/m.
/// For the partition kinds with l not dividing m this is the nominal value.
double transmission_fraction(int l, int m);

SchemeKind scheme_from_name(const std::string& name);
std::string scheme_name(SchemeKind kind);

} // namespace pdrls
