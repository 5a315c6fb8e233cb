#include "mpdarcy/forces.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace mpdarcy {

namespace {

constexpr double pi = std::numbers::pi;

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string_view to_string(ForcePreset preset)
{
    switch (preset) {
    case ForcePreset::zero: return "zero";
    case ForcePreset::constant: return "constant";
    case ForcePreset::gradient_cosine: return "gradient_cosine";
    case ForcePreset::solenoidal_sine: return "solenoidal_sine";
    case ForcePreset::samples: return "samples";
    }
    return "?";
}

ForcePreset parse_force_preset(std::string_view name)
{
    for (auto p : {ForcePreset::zero, ForcePreset::constant, ForcePreset::gradient_cosine,
                   ForcePreset::solenoidal_sine})
        if (name == to_string(p))
            return p;
    throw Error(ErrorCode::config, "unknown force preset '" + std::string(name) +
                                       "' (expected zero, constant, gradient_cosine or solenoidal_sine)");
}

ForceField ForceField::zero()
{
    return {};
}

ForceField ForceField::constant(Vec2 value)
{
    ForceField f;
    f.preset_ = ForcePreset::constant;
    f.potential_ = ForcePreset::constant;
    f.value_ = value;
    return f;
}

ForceField ForceField::gradient_cosine(double amplitude)
{
    ForceField f;
    f.preset_ = ForcePreset::gradient_cosine;
    f.potential_ = ForcePreset::gradient_cosine;
    f.potential_amplitude_ = amplitude;
    return f;
}

ForceField ForceField::solenoidal_sine(double amplitude)
{
    ForceField f;
    f.preset_ = ForcePreset::solenoidal_sine;
    f.amplitude_ = amplitude;
    return f;
}

ForceField ForceField::samples(std::array<int, 2> cells, std::vector<Vec2> values)
{
    if (cells[0] < 1 || cells[1] < 1 ||
        values.size() != static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(cells[1]))
        throw Error(ErrorCode::config, "force samples do not match the macro grid");
    for (const auto& v : values)
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw Error(ErrorCode::config, "force samples must be finite");
    ForceField f;
    f.preset_ = ForcePreset::samples;
    f.cells_ = cells;
    f.samples_ = std::move(values);
    return f;
}

ForceField ForceField::from_csv(const std::string& path, std::array<double, 2> extent, std::array<int, 2> cells)
{
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::config, "force file " + path + " is empty");
    const auto n = static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(cells[1]);
    std::vector<Vec2> values(n);
    std::vector<char> seen(n, 0);
    const double dx = extent[0] / cells[0];
    const double dy = extent[1] / cells[1];
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        double z1 = 0, z2 = 0, f1 = 0, f2 = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &z1, &z2, &f1, &f2) != 4)
            throw Error(ErrorCode::config, path + ":" + std::to_string(row) + ": expected z1,z2,f1,f2");
        const double s1 = z1 / dx - 0.5;
        const double s2 = z2 / dy - 0.5;
        const long i1 = std::lround(s1);
        const long i2 = std::lround(s2);
        if (std::abs(s1 - i1) > 1e-6 || std::abs(s2 - i2) > 1e-6 || i1 < 0 || i2 < 0 || i1 >= cells[0] ||
            i2 >= cells[1])
            throw Error(ErrorCode::config,
                        path + ":" + std::to_string(row) + ": point is not a macro cell center");
        const auto idx = static_cast<std::size_t>(i1 + cells[0] * i2);
        values[idx] = {f1, f2};
        seen[idx] = 1;
    }
    if (std::count(seen.begin(), seen.end(), 1) != static_cast<long>(n))
        throw Error(ErrorCode::config, "force file " + path + " does not cover every macro cell");
    return samples(cells, std::move(values));
}

ForceField ForceField::plus_gradient(const ForceField& gradient) const
{
    if (has_potential() || gradient.preset_ != gradient.potential_ || !gradient.has_potential())
        throw Error(ErrorCode::config, "plus_gradient combines a field without potential with a constant or "
                                       "gradient_cosine field");
    ForceField f = *this;
    if (f.preset_ == ForcePreset::zero)
        f.preset_ = gradient.preset_;
    f.potential_ = gradient.potential_;
    f.value_ = gradient.value_;
    f.potential_amplitude_ = gradient.potential_amplitude_;
    return f;
}

bool ForceField::is_zero() const
{
    bool pot_zero = true;
    if (potential_ == ForcePreset::constant)
        pot_zero = value_[0] == 0.0 && value_[1] == 0.0;
    else if (potential_ == ForcePreset::gradient_cosine)
        pot_zero = potential_amplitude_ == 0.0;
    switch (preset_) {
    case ForcePreset::solenoidal_sine: return pot_zero && amplitude_ == 0.0;
    case ForcePreset::samples:
        return pot_zero &&
               std::all_of(samples_.begin(), samples_.end(), [](const Vec2& v) { return v[0] == 0.0 && v[1] == 0.0; });
    default: return pot_zero;
    }
}

std::string ForceField::describe() const
{
    std::string base;
    switch (preset_) {
    case ForcePreset::zero: base = "zero"; break;
    case ForcePreset::solenoidal_sine: base = "solenoidal_sine(" + g17(amplitude_) + ")"; break;
    case ForcePreset::samples:
        base = "samples(" + std::to_string(cells_[0]) + "x" + std::to_string(cells_[1]) + ")";
        break;
    default: break;
    }
    std::string pot;
    if (potential_ == ForcePreset::constant)
        pot = "constant(" + g17(value_[0]) + "," + g17(value_[1]) + ")";
    else if (potential_ == ForcePreset::gradient_cosine)
        pot = "gradient_cosine(" + g17(potential_amplitude_) + ")";
    if (pot.empty())
        return base;
    return base.empty() ? pot : base + "+" + pot;
}

Vec2 ForceField::sampled_part(const Vec2& z, const Vec2& extent) const
{
    switch (preset_) {
    case ForcePreset::solenoidal_sine: return {amplitude_ * std::sin(pi * z[1] / extent[1]), 0.0};
    case ForcePreset::samples: {
        const int i1 = std::clamp(static_cast<int>(std::floor(z[0] / extent[0] * cells_[0])), 0, cells_[0] - 1);
        const int i2 = std::clamp(static_cast<int>(std::floor(z[1] / extent[1] * cells_[1])), 0, cells_[1] - 1);
        return samples_[static_cast<std::size_t>(i1 + cells_[0] * i2)];
    }
    default: return {0.0, 0.0};
    }
}

double ForceField::potential(const Vec2& z, const Vec2& extent) const
{
    switch (potential_) {
    case ForcePreset::constant: return value_[0] * z[0] + value_[1] * z[1];
    case ForcePreset::gradient_cosine:
        return potential_amplitude_ * std::cos(pi * z[0] / extent[0]) * std::cos(pi * z[1] / extent[1]);
    default: return 0.0;
    }
}

Vec2 ForceField::value(const Vec2& z, const Vec2& extent) const
{
    Vec2 v = sampled_part(z, extent);
    switch (potential_) {
    case ForcePreset::constant:
        v[0] += value_[0];
        v[1] += value_[1];
        break;
    case ForcePreset::gradient_cosine: {
        const double a1 = pi / extent[0];
        const double a2 = pi / extent[1];
        v[0] += -potential_amplitude_ * a1 * std::sin(a1 * z[0]) * std::cos(a2 * z[1]);
        v[1] += -potential_amplitude_ * a2 * std::cos(a1 * z[0]) * std::sin(a2 * z[1]);
        break;
    }
    default: break;
    }
    return v;
}

}  // namespace mpdarcy
