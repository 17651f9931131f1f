#pragma once

// JSON serialization: algebras as {"blocks":[{kind,...}]}, elements as nested
// arrays of [re, im] pairs, both round-trip exact for binary64 values.
// Unknown object keys are rejected everywhere.

#include <json.hpp>

#include <charconv>
#include <set>
#include <string>
#include <vector>

#include "ncmet/algebra.hpp"
#include "ncmet/errors.hpp"

namespace ncmet {

using Json = nlohmann::json;

// shortest round-trip decimal form of a double
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void expect_keys(const Json& j, const std::set<std::string>& allowed,
                        const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown field '" + it.key() + "'");
}

inline Json algebra_to_json(const TracialAlgebra& alg) {
    Json blocks = Json::array();
    for (const Block& b : alg.blocks()) {
        if (const auto* f = std::get_if<FactorBlock>(&b)) {
            blocks.push_back({{"kind", "factor"}, {"n", f->n}, {"weight", f->weight}});
        } else {
            const auto& a = std::get<AbelianBlock>(b);
            Json w = Json::array();
            for (Eigen::Index i = 0; i < a.weights.size(); ++i) w.push_back(a.weights[i]);
            blocks.push_back({{"kind", "abelian"}, {"weights", w}});
        }
    }
    return Json{{"blocks", blocks}};
}

inline AlgebraPtr algebra_from_json(const Json& j) {
    expect_keys(j, {"blocks"}, "algebra");
    if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty())
        throw ConfigError("algebra: 'blocks' must be a non-empty array");
    std::vector<Block> blocks;
    for (const Json& b : j["blocks"]) {
        if (!b.is_object() || !b.contains("kind"))
            throw ConfigError("algebra block: missing 'kind'");
        const std::string kind = b["kind"].get<std::string>();
        if (kind == "factor") {
            expect_keys(b, {"kind", "n", "weight"}, "factor block");
            if (!b.contains("n") || !b.contains("weight"))
                throw ConfigError("factor block: need 'n' and 'weight'");
            blocks.push_back(FactorBlock{b["n"].get<int>(), b["weight"].get<double>()});
        } else if (kind == "abelian") {
            expect_keys(b, {"kind", "weights"}, "abelian block");
            if (!b.contains("weights") || !b["weights"].is_array() || b["weights"].empty())
                throw ConfigError("abelian block: need non-empty 'weights'");
            RealVector w(b["weights"].size());
            for (std::size_t i = 0; i < b["weights"].size(); ++i)
                w[static_cast<Eigen::Index>(i)] = b["weights"][i].get<double>();
            blocks.push_back(AbelianBlock{std::move(w)});
        } else {
            throw ConfigError("algebra block: unknown kind '" + kind + "'");
        }
    }
    return TracialAlgebra::make(std::move(blocks));
}

inline Json element_to_json(const AlgebraElement& x) {
    Json blocks = Json::array();
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        const Matrix& m = x.block(b);
        if (x.algebra()->is_factor(b)) {
            Json rows = Json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                Json row = Json::array();
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    row.push_back({m(i, j).real(), m(i, j).imag()});
                rows.push_back(row);
            }
            blocks.push_back(rows);
        } else {
            Json vals = Json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                vals.push_back({m(i, 0).real(), m(i, 0).imag()});
            blocks.push_back(vals);
        }
    }
    return blocks;
}

inline Complex complex_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(where + ": entries must be [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline AlgebraElement element_from_json(const AlgebraPtr& alg, const Json& j) {
    if (!j.is_array() || j.size() != alg->block_count())
        throw ConfigError("element: block count mismatch");
    AlgebraElement x = AlgebraElement::zero(alg);
    for (std::size_t b = 0; b < alg->block_count(); ++b) {
        auto [r, c] = alg->block_shape(b);
        const Json& jb = j[b];
        if (alg->is_factor(b)) {
            if (!jb.is_array() || static_cast<int>(jb.size()) != r)
                throw ConfigError("element: factor block has wrong row count");
            for (int i = 0; i < r; ++i) {
                if (!jb[static_cast<std::size_t>(i)].is_array() ||
                    static_cast<int>(jb[static_cast<std::size_t>(i)].size()) != c)
                    throw ConfigError("element: factor block has wrong column count");
                for (int k = 0; k < c; ++k)
                    x.block(b)(i, k) = complex_from_json(
                        jb[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], "element");
            }
        } else {
            if (!jb.is_array() || static_cast<int>(jb.size()) != r)
                throw ConfigError("element: abelian block has wrong length");
            for (int i = 0; i < r; ++i)
                x.block(b)(i, 0) = complex_from_json(jb[static_cast<std::size_t>(i)], "element");
        }
    }
    return x;
}

}  // namespace ncmet
