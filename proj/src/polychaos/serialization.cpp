#include "pcmpc/polychaos/serialization.hpp"

#include "pcmpc/common/error.hpp"

namespace pcmpc::polychaos {

nlohmann::json basis_to_json(const OrthoBasis& basis) {
  nlohmann::json fam = nlohmann::json::array();
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& v : basis.variables()) {
    fam.push_back(std::string(family_name(v.family)));
    maps.push_back({{"a", v.a}, {"b", v.b}});
  }
  return {{"families", fam}, {"maps", maps}, {"order", basis.order()}};
}

BasisPtr basis_from_json(const nlohmann::json& j) {
  try {
    std::vector<VariableMap> vars;
    const auto& fam = j.at("families");
    const auto& maps = j.at("maps");
    if (fam.size() != maps.size()) throw ConfigError("basis: families/maps length mismatch");
    for (std::size_t i = 0; i < fam.size(); ++i)
      vars.push_back({family_from_name(fam[i].get<std::string>()), maps[i].at("a").get<double>(),
                      maps[i].at("b").get<double>()});
    const int n = static_cast<int>(vars.size());
    return std::make_shared<const OrthoBasis>(MultiIndexSet(n, j.at("order").get<int>()),
                                              std::move(vars));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("basis: ") + e.what());
  }
}

nlohmann::json expansion_to_json(const PCExpansion& e) {
  const auto& c = e.coeffs();
  return {{"basis", basis_to_json(e.basis())},
          {"order", e.basis().order()},
          {"coeffs", std::vector<double>(c.data(), c.data() + c.size())}};
}

PCExpansion expansion_from_json(const nlohmann::json& j) {
  try {
    auto basis = basis_from_json(j.at("basis"));
    if (j.at("order").get<int>() != basis->order())
      throw ConfigError("expansion: order disagrees with basis order");
    const auto c = j.at("coeffs").get<std::vector<double>>();
    return PCExpansion(std::move(basis), Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("expansion: ") + e.what());
  }
}

}  // namespace pcmpc::polychaos
