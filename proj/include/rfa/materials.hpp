#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rfa/fem.hpp"
#include "rfa/mesh.hpp"

namespace rfa {

enum class Method { BE, HBE };

inline std::string_view to_string(Method m) { return m == Method::BE ? "BE" : "HBE"; }

struct Material {
  double density = 0.0;        // kg/m^3
  double specific_heat = 0.0;  // J/(kg K)
  double conductivity = 0.0;   // W/(m K)
  double sigma = 0.0;          // S/m
  [[nodiscard]] double rho_c() const { return density * specific_heat; }
};

struct MaterialTable {
  std::array<Material, kRegionCount> region{{
      {21500.0, 132.0, 71.0, 4.0e6},  // electrode
      {1200.0, 3200.0, 0.550, 0.222},  // heart muscle
      {1000.0, 4180.0, 0.543, 0.667},  // blood
  }};
  double tau_muscle = 16.0;  // s

  [[nodiscard]] const Material& operator[](Region r) const { return region[static_cast<int>(r)]; }
  Material& operator[](Region r) { return region[static_cast<int>(r)]; }

  void check() const {
    for (int i = 0; i < kRegionCount; ++i) {
      const auto& m = region[i];
      if (!(m.density > 0 && m.specific_heat > 0 && m.conductivity > 0 && m.sigma > 0))
        throw std::invalid_argument("material properties of " + std::string(to_string(static_cast<Region>(i))) +
                                    " must be positive");
    }
    if (!(tau_muscle >= 0)) throw std::invalid_argument("tau_muscle must be >= 0");
  }

  [[nodiscard]] CoefficientMap rho_c() const {
    return {{Region::Electrode, region[0].rho_c()}, {Region::Muscle, region[1].rho_c()},
            {Region::Blood, region[2].rho_c()}};
  }
  [[nodiscard]] CoefficientMap conductivity() const {
    return {{Region::Electrode, region[0].conductivity}, {Region::Muscle, region[1].conductivity},
            {Region::Blood, region[2].conductivity}};
  }
  [[nodiscard]] CoefficientMap sigma() const {
    return {{Region::Electrode, region[0].sigma}, {Region::Muscle, region[1].sigma},
            {Region::Blood, region[2].sigma}};
  }
};

/// How blood-facing surfaces exchange heat.
enum class InterfaceModel {
  /// Blood is a well-mixed bath at T_blood; electrode and muscle see a film toward it.
  ConvectiveBath,
  /// Blood is meshed thermally; films couple each solid to the adjacent blood.
  ContactConductance,
};

inline std::string_view to_string(InterfaceModel m) {
  return m == InterfaceModel::ConvectiveBath ? "bath" : "contact";
}

struct BoundaryConditions {
  double h_electrode = 2000.0;  // W/(m^2 K), electrode-blood film
  double h_muscle = 40000.0;    // W/(m^2 K), muscle-blood film
  double convection_ratio = 1.0;
  double T_blood = 37.0;
  double T_outer = 37.0;
  double T_initial = 37.0;
  InterfaceModel interface = InterfaceModel::ConvectiveBath;

  [[nodiscard]] double effective_h_electrode() const { return convection_ratio * h_electrode; }
  [[nodiscard]] double effective_h_muscle() const { return convection_ratio * h_muscle; }

  void check() const {
    if (!(h_electrode >= 0 && h_muscle >= 0)) throw std::invalid_argument("convection coefficients must be >= 0");
    if (!(convection_ratio >= 0)) throw std::invalid_argument("convection ratio must be >= 0");
  }
};

}  // namespace rfa
