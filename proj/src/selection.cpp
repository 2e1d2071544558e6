#include "pdrls/selection.hpp"

#include <numeric>

#include "pdrls/errors.hpp"

namespace pdrls {

Partition build_partition(int m, int l) {
    if (m < 1 || l < 1 || l > m) {
        throw ConfigError("entry count must satisfy 1 <= l <= m");
    }
    Partition p;
    p.m = m;
    p.l = l;
    for (int start = 0; start < m; start += l) {
        std::vector<int> block;
        for (int t = start; t < m && t < start + l; ++t) block.push_back(t);
        p.blocks.push_back(std::move(block));
    }
    return p;
}

SelectionScheme make_scheme(SchemeKind kind, int m, int l) {
    SelectionScheme s;
    s.kind = kind;
    s.m = m;
    s.l = l;
    if (kind == SchemeKind::uniform_subset) {
        if (m < 1 || l < 1 || l > m) {
            throw ConfigError("entry count must satisfy 1 <= l <= m");
        }
    } else {
        s.partition = build_partition(m, l);
    }
    return s;
}

std::vector<int> SelectionMask::indices() const {
    std::vector<int> out;
    for (Eigen::Index t = 0; t < diag.size(); ++t) {
        if (diag(t) != 0) out.push_back(static_cast<int>(t));
    }
    return out;
}

namespace {

SelectionMask mask_from_block(int m, const std::vector<int>& block) {
    SelectionMask mask;
    mask.diag = Eigen::VectorXi::Zero(m);
    for (int t : block) mask.diag(t) = 1;
    return mask;
}

} // namespace

SelectionMask draw_uniform_subset(int m, int l, Rng& rng) {
    if (m < 1 || l < 1 || l > m) {
        throw ConfigError("entry count must satisfy 1 <= l <= m");
    }
    // Partial Fisher-Yates: always exactly l index draws.
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    SelectionMask mask;
    mask.diag = Eigen::VectorXi::Zero(m);
    for (int j = 0; j < l; ++j) {
        const int pick = j + static_cast<int>(rng.uniform_index(
                                 static_cast<std::uint64_t>(m - j)));
        std::swap(idx[j], idx[pick]);
        mask.diag(idx[j]) = 1;
    }
    return mask;
}

SelectionMask select_entries(const SelectionScheme& scheme, long iteration,
                             Rng& rng) {
    switch (scheme.kind) {
    case SchemeKind::sequential: {
        const int b = static_cast<int>(iteration % scheme.partition.n_blocks());
        return mask_from_block(scheme.m, scheme.partition.blocks[b]);
    }
    case SchemeKind::stochastic: {
        const int b = static_cast<int>(rng.uniform_index(
            static_cast<std::uint64_t>(scheme.partition.n_blocks())));
        return mask_from_block(scheme.m, scheme.partition.blocks[b]);
    }
    case SchemeKind::uniform_subset:
        return draw_uniform_subset(scheme.m, scheme.l, rng);
    }
    throw ConfigError("unknown selection scheme");
}

double transmission_fraction(int l, int m) {
    if (m < 1 || l < 1 || l > m) {
        throw ConfigError("entry count must satisfy 1 <= l <= m");
    }
    return static_cast<double>(l) / static_cast<double>(m);
}

SchemeKind scheme_from_name(const std::string& name) {
    if (name == "sequential") return SchemeKind::sequential;
    if (name == "stochastic") return SchemeKind::stochastic;
    if (name == "uniform-subset") return SchemeKind::uniform_subset;
    throw ConfigError("unknown selection scheme: " + name);
}

std::string scheme_name(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::sequential: return "sequential";
    case SchemeKind::stochastic: return "stochastic";
    case SchemeKind::uniform_subset: return "uniform-subset";
    }
    return "unknown";
}

} // namespace pdrls
