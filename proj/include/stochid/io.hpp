// SPDX-License-Identifier: Apache-2.0
//
// stochid: identifiability of stochastic operators on finite time-frequency grids
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// JSON and CSV encodings of the library types.
//   Window:          {"L": int, "c": [[re, im], ...]}
//   Pattern:         {"L": int, "lambda": [[k, l, kp, lp], ...]}
//   BoxSet:          {"dim": 2|4, "boxes": [{"lo": [...], "len": [...]}]}
//   CovarianceModel: pattern fields + "A": [[[re, im], ...], ...]
//   Report:          {"rank", "sigma_min", "sigma_max", "invertible", ...}

#include "channel.hpp"
#include "rectification.hpp"
#include "slanted.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace stochid
{

using json = nlohmann::ordered_json;

namespace detail
{

template <class T>
T get_field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw InputError(std::string("json: missing field '") + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("json: bad field '") + key + "': " + e.what());
    }
}

inline cx to_complex(const json& v)
{
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw InputError("json: complex numbers are [re, im] pairs");
    return {v[0].get<double>(), v[1].get<double>()};
}

// Exponents may be written as numbers or as "inf".
inline double exponent_from_json(const json& v)
{
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
        return inf;
    if (v.is_number())
        return v.get<double>();
    throw InputError("json: exponent must be a number or \"inf\"");
}

inline json exponent_to_json(double p)
{
    if (std::isinf(p))
        return "inf";
    return p;
}

} // namespace detail

inline json complex_to_json(cx z) { return json::array({z.real(), z.imag()}); }

inline json matrix_to_json(const CMatrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const json& j)
{
    if (!j.is_array())
        throw InputError("json: matrix must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
            throw InputError("json: ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = detail::to_complex(j[i][c]);
    }
    return m;
}

inline json to_json(const Window& w)
{
    json c = json::array();
    for (Eigen::Index i = 0; i < w.c().size(); ++i)
        c.push_back(complex_to_json(w.c()(i)));
    return {{"L", w.L()}, {"c", c}};
}

inline Window window_from_json(const json& j)
{
    const int L = detail::get_field<int>(j, "L");
    const json c = detail::get_field<json>(j, "c");
    if (!c.is_array() || static_cast<int>(c.size()) != L)
        throw InputError("window json: length of c must equal L");
    CVector v(L);
    for (int i = 0; i < L; ++i)
        v(i) = detail::to_complex(c[i]);
    return Window(std::move(v));
}

inline json cells_to_json(const std::vector<Cell>& cells)
{
    json out = json::array();
    for (const auto& c : cells)
        out.push_back({c.k, c.l});
    return out;
}

inline std::vector<Cell> cells_from_json(const json& j)
{
    std::vector<Cell> out;
    for (const auto& c : j)
    {
        if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
            throw InputError("json: cells are [k, l] integer pairs");
        out.push_back({c[0].get<int>(), c[1].get<int>()});
    }
    return out;
}

inline json to_json(const Pattern& p)
{
    json lambda = json::array();
    for (const auto& q : p.lambda())
        lambda.push_back({q.first.k, q.first.l, q.second.k, q.second.l});
    return {{"L", p.L()}, {"lambda", lambda}};
}

inline Pattern pattern_from_json(const json& j)
{
    const int L = detail::get_field<int>(j, "L");
    const json lam = detail::get_field<json>(j, "lambda");
    if (!lam.is_array())
        throw InputError("pattern json: lambda must be an array");
    QuadSet set;
    for (const auto& q : lam)
    {
        if (!q.is_array() || q.size() != 4)
            throw InputError("pattern json: lambda members are [k, l, kp, lp]");
        try
        {
            set.insert(Quad{{q[0].get<int>(), q[1].get<int>()}, {q[2].get<int>(), q[3].get<int>()}});
        }
        catch (const nlohmann::json::exception& e)
        {
            throw InputError(std::string("pattern json: ") + e.what());
        }
    }
    return Pattern(L, std::move(set));
}

inline json to_json(const DefectWitness& w)
{
    return {{"kind", to_string(w.kind)}, {"gamma1", cells_to_json(w.gamma1)}, {"gamma2", cells_to_json(w.gamma2)}};
}

inline DefectWitness witness_from_json(const json& j)
{
    return {defect_kind_from_string(detail::get_field<std::string>(j, "kind")),
            cells_from_json(detail::get_field<json>(j, "gamma1")), cells_from_json(detail::get_field<json>(j, "gamma2"))};
}

inline json to_json(const IdentifiabilityReport& r)
{
    json j = {{"rank", r.rank}, {"sigma_min", r.sigma_min}, {"sigma_max", r.sigma_max}, {"invertible", r.invertible}};
    j["condition"] = std::isfinite(r.condition) ? json(r.condition) : json(nullptr);
    j["reason"] = r.reason.empty() ? json(nullptr) : json(r.reason);
    return j;
}

inline IdentifiabilityReport report_from_json(const json& j)
{
    IdentifiabilityReport r;
    r.rank = detail::get_field<int>(j, "rank");
    r.sigma_min = detail::get_field<double>(j, "sigma_min");
    r.sigma_max = detail::get_field<double>(j, "sigma_max");
    r.invertible = detail::get_field<bool>(j, "invertible");
    if (j.contains("condition") && !j["condition"].is_null())
        r.condition = j["condition"].get<double>();
    if (j.contains("reason") && !j["reason"].is_null())
        r.reason = j["reason"].get<std::string>();
    return r;
}

inline json to_json(const BoxSet& s)
{
    json boxes = json::array();
    for (const auto& b : s.boxes())
        boxes.push_back({{"lo", b.lo}, {"len", b.len}});
    return {{"dim", s.dim()}, {"boxes", boxes}};
}

inline BoxSet boxset_from_json(const json& j)
{
    const int dim = detail::get_field<int>(j, "dim");
    std::vector<Box> boxes;
    for (const auto& b : detail::get_field<json>(j, "boxes"))
        boxes.push_back({detail::get_field<std::vector<double>>(b, "lo"), detail::get_field<std::vector<double>>(b, "len")});
    return BoxSet(dim, std::move(boxes));
}

inline json to_json(const Rectification& r)
{
    json j = {{"a", r.a},
              {"b", r.b},
              {"L", r.L},
              {"dim", r.dim},
              {"origin", {r.t0, r.f0}},
              {"raw_size", r.raw_size},
              {"volume_estimate", r.volume_estimate()},
              {"volume_exceeds_one", r.volume_exceeds_one()},
              {"pattern", to_json(r.pattern)}};
    return j;
}

inline Rectification rectification_from_json(const json& j)
{
    const json origin = detail::get_field<json>(j, "origin");
    if (!origin.is_array() || origin.size() != 2 || !origin[0].is_number() || !origin[1].is_number())
        throw InputError("rectification json: origin is [t0, f0]");
    return {detail::get_field<double>(j, "a"),
            detail::get_field<double>(j, "b"),
            detail::get_field<int>(j, "L"),
            detail::get_field<int>(j, "dim"),
            origin.at(0).get<double>(),
            origin.at(1).get<double>(),
            pattern_from_json(detail::get_field<json>(j, "pattern")),
            detail::get_field<std::size_t>(j, "raw_size")};
}

inline json to_json(const CovarianceModel& m)
{
    json j = to_json(m.pattern());
    j["A"] = matrix_to_json(m.A());
    return j;
}

inline CovarianceModel covariance_from_json(const json& j)
{
    return CovarianceModel(pattern_from_json(j), matrix_from_json(detail::get_field<json>(j, "A")));
}

inline json to_json(const SlantedFamily& f)
{
    return {{"d1", f.d1},
            {"d2", f.d2},
            {"lambda", f.lambda},
            {"r", f.r},
            {"scale", f.scale},
            {"r1", f.r1},
            {"r2", f.r2},
            {"p1", detail::exponent_to_json(f.p1)},
            {"p2", detail::exponent_to_json(f.p2)},
            {"seed", f.seed},
            {"planted", f.planted},
            {"plant_slant", f.plant_slant}};
}

// Missing fields take the defaults of default_family(lambda).
inline SlantedFamily family_from_json(const json& j)
{
    SlantedFamily f;
    f.lambda = detail::get_field<double>(j, "lambda");
    f.p1 = j.contains("p1") ? detail::exponent_from_json(j["p1"]) : 2.0;
    f.p2 = j.contains("p2") ? detail::exponent_from_json(j["p2"]) : f.p1;
    f.plant_slant = f.lambda / 2.0;
    f.planted = {4, 8, 16, 32, 64, 128};
    auto opt = [&](const char* key, auto& field) {
        if (j.contains(key))
            field = detail::get_field<std::decay_t<decltype(field)>>(j, key);
    };
    opt("d1", f.d1);
    opt("d2", f.d2);
    opt("scale", f.scale);
    opt("r1", f.r1);
    opt("r2", f.r2);
    opt("seed", f.seed);
    opt("planted", f.planted);
    opt("plant_slant", f.plant_slant);
    if (j.contains("r"))
        f.r = detail::get_field<double>(j, "r");
    else
        f.r = f.exponent_threshold() + 2.0;
    f.validate();
    return f;
}

// Fixed 17-significant-digit formatting for CSV output.
inline std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string probe_csv(const std::vector<ProbeRow>& rows)
{
    std::ostringstream os;
    os << "N2,minor_rows,minor_cols,sigma_min,ratio\n";
    for (const auto& r : rows)
        os << r.n2 << ',' << r.minor_rows << ',' << r.minor_cols << ',' << format_double(r.sigma_min) << ','
           << format_double(r.ratio) << '\n';
    return os.str();
}

// Gamma-graph edge list (self-loops omitted) for external plotting.
inline std::string edge_list_csv(const Pattern& p)
{
    std::ostringstream os;
    os << "k,l,kp,lp\n";
    for (const auto& q : p.lambda())
        if (!q.diagonal())
            os << q.first.k << ',' << q.first.l << ',' << q.second.k << ',' << q.second.l << '\n';
    return os.str();
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path);
    try
    {
        return json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw InputError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << text;
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

} // namespace stochid
