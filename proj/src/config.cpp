#include "mpdarcy/config.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"

#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <set>

namespace mpdarcy {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw Error(ErrorCode::config, where + ": " + what);
}

void check_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        fail(where, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!keys.count(key))
            fail(where, "unknown key '" + key + "'");
}

double get_number(const json& j, const std::string& where)
{
    if (!j.is_number())
        fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        fail(where, "must be finite");
    return v;
}

int get_int(const json& j, const std::string& where)
{
    if (!j.is_number_integer())
        fail(where, "expected an integer");
    return j.get<int>();
}

bool get_bool(const json& j, const std::string& where)
{
    if (!j.is_boolean())
        fail(where, "expected true or false");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where)
{
    if (!j.is_string())
        fail(where, "expected a string");
    return j.get<std::string>();
}

template <std::size_t N>
std::array<double, N> get_vec(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != N)
        fail(where, "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> v{};
    for (std::size_t i = 0; i < N; ++i)
        v[i] = get_number(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

ForceConfig parse_force(const json& j, const std::string& where, const std::string& base_dir)
{
    check_object(j, where, {"preset", "amplitude", "value", "csv"});
    ForceConfig f;
    if (j.contains("csv")) {
        if (j.contains("preset"))
            fail(where, "give either 'preset' or 'csv', not both");
        f.preset = ForcePreset::samples;
        std::filesystem::path p = get_string(j["csv"], where + ".csv");
        if (p.is_relative())
            p = std::filesystem::path(base_dir) / p;
        f.csv = p.string();
        if (!std::filesystem::exists(p))
            throw Error(ErrorCode::io, "force file not found: " + f.csv);
        return f;
    }
    if (j.contains("preset"))
        f.preset = parse_force_preset(get_string(j["preset"], where + ".preset"));
    if (j.contains("amplitude"))
        f.amplitude = get_number(j["amplitude"], where + ".amplitude");
    if (j.contains("value"))
        f.value = get_vec<2>(j["value"], where + ".value");
    return f;
}

json force_json(const ForceConfig& f)
{
    if (f.preset == ForcePreset::samples)
        return {{"csv", f.csv}};
    return {{"preset", std::string(to_string(f.preset))}, {"amplitude", f.amplitude}, {"value", f.value}};
}

std::string_view to_string(PreconditionerKind k)
{
    switch (k) {
    case PreconditionerKind::coupled_ic: return "coupled_ic";
    case PreconditionerKind::block_ic: return "block_ic";
    case PreconditionerKind::block_jacobi: return "block_jacobi";
    }
    return "?";
}

}  // namespace

ForceField ForceConfig::resolve(const MacroGrid& grid) const
{
    switch (preset) {
    case ForcePreset::zero: return ForceField::zero();
    case ForcePreset::constant: return ForceField::constant(value);
    case ForcePreset::gradient_cosine: return ForceField::gradient_cosine(amplitude);
    case ForcePreset::solenoidal_sine: return ForceField::solenoidal_sine(amplitude);
    case ForcePreset::samples: return ForceField::from_csv(csv, grid.extent, grid.cells);
    }
    return ForceField::zero();
}

double RunConfig::h_for(double e) const
{
    return h_sqrt ? std::sqrt(e) : h_fixed;
}

RunConfig parse_config(const json& j, const std::string& base_dir)
{
    RunConfig c;
    check_object(j, "config", {"geometry", "params", "macro", "solver", "validation", "output"});

    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        check_object(g, "geometry", {"kind", "center", "size", "axis", "n"});
        if (g.contains("kind"))
            c.obstacle.kind = parse_obstacle_kind(get_string(g["kind"], "geometry.kind"));
        if (g.contains("center"))
            c.obstacle.center = get_vec<3>(g["center"], "geometry.center");
        if (g.contains("size"))
            c.obstacle.size = get_vec<3>(g["size"], "geometry.size");
        if (g.contains("axis"))
            c.obstacle.axis = get_int(g["axis"], "geometry.axis");
        if (g.contains("n"))
            c.n = get_int(g["n"], "geometry.n");
        if (c.obstacle.axis < 0 || c.obstacle.axis > 2)
            fail("geometry.axis", "must be 0, 1 or 2");
        if (c.n < 4)
            fail("geometry.n", "n >= 4 required");
        for (double s : c.obstacle.size)
            if (s < 0.0)
                fail("geometry.size", "sizes must be non-negative");
    }
    if (j.contains("params")) {
        const json& p = j["params"];
        check_object(p, "params", {"N2", "Rc"});
        if (p.contains("N2"))
            c.params.N2 = get_number(p["N2"], "params.N2");
        if (p.contains("Rc"))
            c.params.Rc = get_number(p["Rc"], "params.Rc");
    }
    c.params.validate();

    if (j.contains("macro")) {
        const json& m = j["macro"];
        check_object(m, "macro", {"omega", "grid", "f", "g"});
        if (m.contains("omega"))
            c.macro.extent = get_vec<2>(m["omega"], "macro.omega");
        if (m.contains("grid")) {
            const json& gr = m["grid"];
            if (!gr.is_array() || gr.size() != 2)
                fail("macro.grid", "expected two integers");
            c.macro.cells = {get_int(gr[0], "macro.grid[0]"), get_int(gr[1], "macro.grid[1]")};
        }
        if (m.contains("f"))
            c.f = parse_force(m["f"], "macro.f", base_dir);
        if (m.contains("g"))
            c.g = parse_force(m["g"], "macro.g", base_dir);
        if (!(c.macro.extent[0] > 0.0 && c.macro.extent[1] > 0.0))
            fail("macro.omega", "extents must be positive");
        if (c.macro.cells[0] < 4 || c.macro.cells[1] < 4)
            fail("macro.grid", "at least 4 cells per axis required");
    }

    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_object(s, "solver", {"tol", "max_iter", "preconditioner"});
        if (s.contains("tol"))
            c.solver.tol = get_number(s["tol"], "solver.tol");
        if (s.contains("max_iter"))
            c.solver.max_iter = get_int(s["max_iter"], "solver.max_iter");
        if (s.contains("preconditioner")) {
            const std::string name = get_string(s["preconditioner"], "solver.preconditioner");
            if (name == "coupled_ic")
                c.solver.preconditioner = PreconditionerKind::coupled_ic;
            else if (name == "block_ic")
                c.solver.preconditioner = PreconditionerKind::block_ic;
            else if (name == "block_jacobi")
                c.solver.preconditioner = PreconditionerKind::block_jacobi;
            else
                fail("solver.preconditioner", "expected coupled_ic, block_ic or block_jacobi");
        }
        if (!(c.solver.tol > 0.0 && c.solver.tol <= 1e-4))
            fail("solver.tol", "must lie in (0, 1e-4]");
        if (c.solver.max_iter < 0)
            fail("solver.max_iter", "must be >= 0 (0 selects the default)");
    }

    if (j.contains("validation")) {
        const json& v = j["validation"];
        check_object(v, "validation", {"eps", "m", "h_rule", "unfolding"});
        if (v.contains("eps")) {
            if (!v["eps"].is_array())
                fail("validation.eps", "expected an array of numbers");
            c.eps.clear();
            for (std::size_t i = 0; i < v["eps"].size(); ++i)
                c.eps.push_back(get_number(v["eps"][i], "validation.eps[" + std::to_string(i) + "]"));
        }
        if (v.contains("m"))
            c.m = get_int(v["m"], "validation.m");
        if (v.contains("h_rule")) {
            const json& h = v["h_rule"];
            if (h.is_string()) {
                if (h.get<std::string>() != "sqrt")
                    fail("validation.h_rule", "expected \"sqrt\" or a number");
                c.h_sqrt = true;
            } else {
                c.h_sqrt = false;
                c.h_fixed = get_number(h, "validation.h_rule");
            }
        }
        if (v.contains("unfolding")) {
            const json& u = v["unfolding"];
            check_object(u, "validation.unfolding", {"eps", "h", "m"});
            if (u.contains("eps"))
                c.unfold_eps = get_number(u["eps"], "validation.unfolding.eps");
            if (u.contains("h"))
                c.unfold_h = get_number(u["h"], "validation.unfolding.h");
            if (u.contains("m"))
                c.unfold_m = get_int(u["m"], "validation.unfolding.m");
        }
        for (double e : c.eps)
            if (!(e > 0.0 && e < 1.0))
                fail("validation.eps", "values must lie in (0, 1)");
        if (c.m < 4 || c.unfold_m < 4)
            fail("validation.m", "m >= 4 required");
        if (!c.h_sqrt && !(c.h_fixed > 0.0))
            fail("validation.h_rule", "fixed h must be positive");
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        check_object(o, "output", {"directory", "formats", "plot"});
        if (o.contains("directory"))
            c.out_dir = get_string(o["directory"], "output.directory");
        if (o.contains("formats")) {
            if (!o["formats"].is_array())
                fail("output.formats", "expected an array of \"csv\" / \"vtk\"");
            c.write_csv = c.write_vtk = false;
            for (const auto& f : o["formats"]) {
                const std::string s = get_string(f, "output.formats");
                if (s == "csv")
                    c.write_csv = true;
                else if (s == "vtk")
                    c.write_vtk = true;
                else
                    fail("output.formats", "unknown format '" + s + "'");
            }
        }
        if (o.contains("plot"))
            c.plot = get_bool(o["plot"], "output.plot");
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    const std::string text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::config, path + ": invalid JSON: " + e.what());
    }
    const auto base = std::filesystem::path(path).parent_path();
    return parse_config(j, base.empty() ? "." : base.string());
}

json to_json(const RunConfig& c)
{
    json formats = json::array();
    if (c.write_csv)
        formats.push_back("csv");
    if (c.write_vtk)
        formats.push_back("vtk");
    return {
        {"geometry",
         {{"kind", std::string(to_string(c.obstacle.kind))},
          {"center", c.obstacle.center},
          {"size", c.obstacle.size},
          {"axis", c.obstacle.axis},
          {"n", c.n}}},
        {"params", {{"N2", c.params.N2}, {"Rc", c.params.Rc}}},
        {"macro", {{"omega", c.macro.extent}, {"grid", c.macro.cells}, {"f", force_json(c.f)}, {"g", force_json(c.g)}}},
        {"solver",
         {{"tol", c.solver.tol},
          {"max_iter", c.solver.max_iter},
          {"preconditioner", std::string(to_string(c.solver.preconditioner))}}},
        {"validation",
         {{"eps", c.eps},
          {"m", c.m},
          {"h_rule", c.h_sqrt ? json("sqrt") : json(c.h_fixed)},
          {"unfolding", {{"eps", c.unfold_eps}, {"h", c.unfold_h}, {"m", c.unfold_m}}}}},
        {"output", {{"directory", c.out_dir}, {"formats", formats}, {"plot", c.plot}}},
    };
}

}  // namespace mpdarcy
