#pragma once

/**
 * @file forces.hpp
 * @brief In-plane force fields f'(z'), g'(z') on the rectangle omega.
 *
 * A field is split into a sampled part and a known potential q, so that
 * field = sampled + grad q. Gradient-type presets live entirely in the
 * potential and are absorbed by the macro pressure without discretization
 * error.
 */

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace mpdarcy {

using Vec2 = std::array<double, 2>;

enum class ForcePreset {
    zero,
    constant,         ///< value
    gradient_cosine,  ///< grad of amplitude * cos(pi z1 / L1) cos(pi z2 / L2)
    solenoidal_sine,  ///< (amplitude * sin(pi z2 / L2), 0)
    samples,          ///< piecewise constant per macro cell, read from CSV
};

std::string_view to_string(ForcePreset preset);
ForcePreset parse_force_preset(std::string_view name);

class ForceField {
public:
    ForceField() = default;

    static ForceField zero();
    static ForceField constant(Vec2 value);
    static ForceField gradient_cosine(double amplitude = 1.0);
    static ForceField solenoidal_sine(double amplitude = 1.0);
    /// `values` holds n1 * n2 cell values, index i1 + n1 * i2.
    static ForceField samples(std::array<int, 2> cells, std::vector<Vec2> values);
    /// CSV with header z1,z2,f1,f2 and one row per macro cell center.
    static ForceField from_csv(const std::string& path, std::array<double, 2> extent, std::array<int, 2> cells);

    /// Adds the gradient part of a constant or gradient_cosine field to a
    /// field without a potential. Throws ConfigError otherwise.
    ForceField plus_gradient(const ForceField& gradient) const;

    ForcePreset preset() const { return preset_; }
    bool is_zero() const;
    /// Canonical description for reports and hashes.
    std::string describe() const;

    /// Full field value at z in omega = (0, L1) x (0, L2).
    Vec2 value(const Vec2& z, const Vec2& extent) const;
    /// Part of the field without the potential contribution.
    Vec2 sampled_part(const Vec2& z, const Vec2& extent) const;
    /// Potential q with value - sampled_part = grad q.
    double potential(const Vec2& z, const Vec2& extent) const;
    bool has_potential() const { return potential_ != ForcePreset::zero; }

private:
    ForcePreset preset_ = ForcePreset::zero;
    double amplitude_ = 1.0;
    ForcePreset potential_ = ForcePreset::zero;
    Vec2 value_{0.0, 0.0};
    double potential_amplitude_ = 1.0;
    std::array<int, 2> cells_{0, 0};
    std::vector<Vec2> samples_;
};

}  // namespace mpdarcy
