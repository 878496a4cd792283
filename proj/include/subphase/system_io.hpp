#pragma once

#include "subphase/frames.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace subphase {

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kSystemFormatVersion = 1;

/// Serializes a subspace system as a single JSON document: a header with
/// (d, k, n, normalized, format_version), the weight array, and one flat
/// column-major d x k basis array per subspace. Doubles round-trip exactly
/// (shortest-representation printing), so write -> read is lossless.
inline void write_subspace_system(const std::string& path, const SubspaceSystem& sys) {
    nlohmann::json doc;
    doc["format_version"] = kSystemFormatVersion;
    doc["d"] = sys.ambient_dim();
    doc["k"] = sys.sub_dim();
    doc["n"] = sys.size();
    doc["normalized"] = sys.is_normalized();
    doc["weights"] = std::vector<double>(sys.weights().data(),
                                         sys.weights().data() + sys.weights().size());
    nlohmann::json subs = nlohmann::json::array();
    for (Index j = 0; j < sys.size(); ++j) {
        const Matrix& basis = sys.subspace(j).basis();
        subs.push_back(std::vector<double>(basis.data(), basis.data() + basis.size()));
    }
    doc["subspaces"] = std::move(subs);

    std::ofstream out(path);
    if (!out) throw IoError("write_subspace_system: cannot open '" + path + "' for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write_subspace_system: write to '" + path + "' failed");
}

inline SubspaceSystem read_subspace_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_subspace_system: cannot open '" + path + "'");

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("read_subspace_system: '" + path + "': " + e.what());
    }

    const auto fail = [&](const std::string& field, const std::string& why) -> IoError {
        return IoError("read_subspace_system: '" + path + "', field '" + field + "': " + why);
    };

    try {
        if (doc.value("format_version", 0) != kSystemFormatVersion)
            throw fail("format_version", "unsupported version");
        const Index d = doc.at("d").get<Index>();
        const Index k = doc.at("k").get<Index>();
        const Index n = doc.at("n").get<Index>();
        if (d < 1) throw fail("d", "must be >= 1");
        if (k < 1 || k > d) throw fail("k", "must satisfy 1 <= k <= d");
        if (n < 1) throw fail("n", "must be >= 1");

        const auto& wv = doc.at("weights");
        if (static_cast<Index>(wv.size()) != n) throw fail("weights", "count != n");
        Vector weights(n);
        for (Index j = 0; j < n; ++j) {
            weights(j) = wv[static_cast<std::size_t>(j)].get<double>();
            if (!std::isfinite(weights(j)) || weights(j) <= 0.0)
                throw fail("weights", "entries must be finite and positive");
        }

        const auto& sv = doc.at("subspaces");
        if (static_cast<Index>(sv.size()) != n) throw fail("subspaces", "count != n");
        std::vector<Subspace> subspaces;
        subspaces.reserve(static_cast<std::size_t>(n));
        for (Index j = 0; j < n; ++j) {
            const auto& flat = sv[static_cast<std::size_t>(j)];
            if (static_cast<Index>(flat.size()) != d * k)
                throw fail("subspaces", "basis " + std::to_string(j) + " must have d*k entries");
            Matrix basis(d, k);
            for (Index i = 0; i < d * k; ++i) {
                const double v = flat[static_cast<std::size_t>(i)].get<double>();
                if (!std::isfinite(v))
                    throw fail("subspaces", "basis " + std::to_string(j) + " has non-finite entry");
                basis(i % d, i / d) = v;  // column-major
            }
            const double drift =
                (basis.transpose() * basis - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
            if (drift <= 1e-10) {
                subspaces.emplace_back(std::move(basis));
            } else if (drift <= 1e-6) {
                // Mild I/O rounding: restore orthonormality, keep the span.
                subspaces.push_back(Subspace::orthonormalized(basis));
            } else {
                throw fail("subspaces",
                           "basis " + std::to_string(j) + " is not orthonormal (drift " +
                               std::to_string(drift) + ")");
            }
        }

        SubspaceSystem sys(std::move(subspaces), std::move(weights));
        const bool declared = doc.value("normalized", false);
        if (declared && !sys.is_normalized())
            throw fail("normalized", "declared normalized but weights do not sum to one");
        return sys;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("read_subspace_system: '" + path + "': " + e.what());
    }
}

} // namespace subphase
