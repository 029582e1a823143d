#include "modelfile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace patchlam {

namespace {

using nlohmann::json;

double rational_or_number(const json& node, const std::string& where, Rational* exact) {
    if (node.is_string()) {
        try {
            const Rational r = Rational::parse(node.get<std::string>());
            if (exact) *exact = r;
            return r.value();
        } catch (const std::exception& err) {
            throw ParseError(where + ": " + err.what());
        }
    }
    if (node.is_number()) {
        const double v = node.get<double>();
        if (exact) {
            // Recover small exact fractions so they round-trip; den == 0
            // marks "no exact form known".
            *exact = Rational{0, 0};
            const long long num = std::llround(v * 720.0);
            if (static_cast<double>(num) / 720.0 == v) {
                long long a = num == 0 ? 720 : (num < 0 ? -num : num), b = 720;
                while (b != 0) {
                    const long long t = a % b;
                    a = b;
                    b = t;
                }
                *exact = Rational{num / a, 720 / a};
            }
        }
        return v;
    }
    throw ParseError(where + ": expected a number or a \"p/q\" string");
}

}  // namespace

PatchModel parse_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ParseError(std::string("model file is not valid JSON: ") + err.what());
    }
    if (!doc.is_object()) throw ParseError("model file must be a JSON object");

    if (!doc.contains("n") || !doc["n"].is_number_integer())
        throw ParseError("n: required integer patch count");
    const int n = doc["n"].get<int>();
    if (n < 1) throw ParseError("n: must be >= 1");

    if (!doc.contains("breakpoints") || !doc["breakpoints"].is_array() ||
        doc["breakpoints"].empty())
        throw ParseError("breakpoints: required non-empty array");
    if (!doc.contains("segments") || !doc["segments"].is_array())
        throw ParseError("segments: required array");
    if (doc["segments"].size() != doc["breakpoints"].size())
        throw ParseError("segments: length " + std::to_string(doc["segments"].size()) +
                         " does not match breakpoints length " +
                         std::to_string(doc["breakpoints"].size()));

    std::vector<double> breaks;
    std::vector<Rational> exact;
    for (size_t k = 0; k < doc["breakpoints"].size(); ++k) {
        Rational r;
        const double v = rational_or_number(doc["breakpoints"][k],
                                            "breakpoints[" + std::to_string(k) + "]", &r);
        if (k == 0 && v != 0.0) throw ParseError("breakpoints[0]: must be 0");
        if (!breaks.empty() && v <= breaks.back())
            throw ParseError("breakpoints[" + std::to_string(k) + "]: must be strictly increasing");
        if (v < 0.0 || v >= 1.0)
            throw ParseError("breakpoints[" + std::to_string(k) + "]: must lie in [0,1)");
        breaks.push_back(v);
        exact.push_back(r);
    }

    std::vector<Matrix> growth, migration;
    for (size_t k = 0; k < doc["segments"].size(); ++k) {
        const std::string where = "segments[" + std::to_string(k) + "]";
        const json& seg = doc["segments"][k];
        if (!seg.is_object() || !seg.contains("r") || !seg["r"].is_array() ||
            seg["r"].size() != static_cast<size_t>(n))
            throw ParseError(where + ".r: required array of " + std::to_string(n) + " growth rates");
        Matrix r = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            const json& entry = seg["r"][static_cast<size_t>(i)];
            if (!entry.is_number())
                throw ParseError(where + ".r[" + std::to_string(i) + "]: expected a number");
            r(i, i) = entry.get<double>();
            if (!std::isfinite(r(i, i)))
                throw ParseError(where + ".r[" + std::to_string(i) + "]: must be finite");
        }
        growth.push_back(std::move(r));

        Matrix l = Matrix::Zero(n, n);
        if (seg.contains("L") && !seg["L"].is_null()) {
            if (!seg["L"].is_array() || seg["L"].size() != static_cast<size_t>(n))
                throw ParseError(where + ".L: expected an " + std::to_string(n) + "x" +
                                 std::to_string(n) + " array");
            for (int i = 0; i < n; ++i) {
                const json& row = seg["L"][static_cast<size_t>(i)];
                if (!row.is_array() || row.size() != static_cast<size_t>(n))
                    throw ParseError(where + ".L[" + std::to_string(i) + "]: expected " +
                                     std::to_string(n) + " entries");
                for (int j = 0; j < n; ++j) {
                    const json& entry = row[static_cast<size_t>(j)];
                    if (!entry.is_number())
                        throw ParseError(where + ".L[" + std::to_string(i) + "][" +
                                         std::to_string(j) + "]: expected a number");
                    l(i, j) = entry.get<double>();
                }
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j && l(i, j) < 0.0)
                        throw ParseError(where + ".L[" + std::to_string(i) + "][" +
                                         std::to_string(j) +
                                         "]: off-diagonal migration rates must be >= 0");
            for (int j = 0; j < n; ++j) {
                const double s = l.col(j).sum();
                if (std::abs(s) > 1e-12) {
                    std::ostringstream os;
                    os << where << ".L: column " << j << " sums to " << s << " (expected 0)";
                    throw ParseError(os.str());
                }
            }
        }
        migration.push_back(std::move(l));
    }

    PatchModel model = make_patch_model(
        PiecewiseMatrixPath::piecewise_constant(breaks, std::move(growth)),
        PiecewiseMatrixPath::piecewise_constant(breaks, std::move(migration)),
        doc.value("name", std::string{}), doc.value("description", std::string{}));
    model.growth_breaks_exact = exact;
    model.migration_breaks_exact = std::move(exact);
    return model;
}

PatchModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string model_to_json(const PatchModel& model) {
    if (!model.growth.all_constant() || !model.migration.all_constant())
        throw std::invalid_argument(
            "model files support piecewise-constant models only; smooth segments are "
            "library-API-only");

    // Serialize on the union of the two breakpoint sets.
    const CombinedPath combined = merge_breakpoints(model.growth, model.migration);
    const auto& breaks = combined.breakpoints();

    json doc;
    if (!model.name.empty()) doc["name"] = model.name;
    if (!model.description.empty()) doc["description"] = model.description;
    doc["n"] = model.dim();

    json jb = json::array();
    const bool shared_exact = model.growth_breaks_exact.size() == breaks.size() &&
                              model.growth.breakpoints() == breaks;
    for (size_t k = 0; k < breaks.size(); ++k) {
        if (shared_exact && model.growth_breaks_exact[k].den != 0 &&
            model.growth_breaks_exact[k].value() == breaks[k]) {
            const Rational& r = model.growth_breaks_exact[k];
            if (r.den == 1) jb.push_back(r.num);
            else jb.push_back(r.str());
        } else {
            jb.push_back(breaks[k]);
        }
    }
    doc["breakpoints"] = std::move(jb);

    json segs = json::array();
    for (size_t k = 0; k < breaks.size(); ++k) {
        const double tau = breaks[k];
        const Matrix r = model.growth.at(tau);
        const Matrix l = model.migration.at(tau);
        json seg;
        json jr = json::array();
        for (int i = 0; i < model.dim(); ++i) jr.push_back(r(i, i));
        seg["r"] = std::move(jr);
        if (!l.isZero(0.0)) {
            json jl = json::array();
            for (int i = 0; i < model.dim(); ++i) {
                json row = json::array();
                for (int j = 0; j < model.dim(); ++j) row.push_back(l(i, j));
                jl.push_back(std::move(row));
            }
            seg["L"] = std::move(jl);
        }
        segs.push_back(std::move(seg));
    }
    doc["segments"] = std::move(segs);
    return doc.dump(2) + "\n";
}

void save_model_file(const PatchModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write model file '" + path + "'");
    out << model_to_json(model);
}

}  // namespace patchlam
