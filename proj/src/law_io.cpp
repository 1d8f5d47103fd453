#include "nlshape/law_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlshape::laws {

namespace {

double number_field(const nlohmann::json& spec, const char* key) {
  if (!spec.contains(key) || !spec.at(key).is_number())
    throw std::invalid_argument(std::string("law spec: missing numeric field \"") + key + "\"");
  return spec.at(key).get<double>();
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace

InteractionLaw law_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("type") || !spec.at("type").is_string())
    throw std::invalid_argument("law spec: expected an object with a string \"type\"");
  const auto type = spec.at("type").get<std::string>();
  if (type == "step") return step_law(number_field(spec, "k"));
  if (type == "ramp") return ramp_law();
  if (type == "pca") {
    if (!spec.contains("lambdas") || !spec.at("lambdas").is_array())
      throw std::invalid_argument("law spec: pca needs a \"lambdas\" array");
    std::vector<double> lambdas;
    for (const auto& item : spec.at("lambdas")) {
      if (!item.is_number()) throw std::invalid_argument("law spec: lambdas must be numbers");
      lambdas.push_back(item.get<double>());
    }
    return pca_law(std::move(lambdas));
  }
  if (type == "rescaled") {
    if (!spec.contains("base")) throw std::invalid_argument("law spec: rescaled needs a \"base\"");
    return rescale(law_from_json(spec.at("base")), number_field(spec, "alpha"), number_field(spec, "beta"));
  }
  throw std::invalid_argument("law spec: unknown type \"" + type + "\"");
}

nlohmann::json law_to_json(const InteractionLaw& law) {
  if (const auto* step = law.get_if<StepLaw>()) return {{"type", "step"}, {"k", step->k}};
  if (const auto* pca = law.get_if<PiecewiseConstantLaw>()) return {{"type", "pca"}, {"lambdas", pca->lambdas}};
  if (law.get_if<RampLaw>()) return {{"type", "ramp"}};
  if (const auto* r = law.get_if<RescaledLaw>())
    return {{"type", "rescaled"}, {"alpha", r->alpha}, {"beta", r->beta}, {"base", law_to_json(*r->base)}};
  throw std::invalid_argument("generic laws have no serialised form");
}

InteractionLaw parse_law(std::string_view text) {
  const std::string spec = trim(text);
  if (spec.empty()) throw std::invalid_argument("law spec: empty");
  if (spec.front() == '{') {
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(spec);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("law spec: invalid JSON: ") + e.what());
    }
    return law_from_json(parsed);
  }
  if (spec == "ramp") return ramp_law();
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("law spec: unrecognised \"" + spec + "\"");
  const std::string head = spec.substr(0, colon);
  const std::string body = trim(std::string_view(spec).substr(colon + 1));
  try {
    if (head == "step") return law_from_json({{"type", "step"}, {"k", nlohmann::json::parse(body)}});
    if (head == "pca") return law_from_json({{"type", "pca"}, {"lambdas", nlohmann::json::parse(body)}});
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("law spec: cannot parse \"" + body + "\"");
  }
  throw std::invalid_argument("law spec: unknown shorthand \"" + head + "\"");
}

InteractionLaw load_law(const std::string& argument) {
  try {
    return parse_law(argument);
  } catch (const std::invalid_argument& inline_error) {
    std::ifstream file(argument);
    if (!file) throw std::invalid_argument(std::string(inline_error.what()) + " (and no such file)");
    std::stringstream contents;
    contents << file.rdbuf();
    return parse_law(contents.str());
  }
}

}  // namespace nlshape::laws
