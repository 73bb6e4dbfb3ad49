#pragma once

#include <stdexcept>
#include <string>

namespace onramp {

enum class ModelId { c1, c2, c3, c4, ml1, ml2, ml3 };

inline const char* to_string(ModelId m) {
  switch (m) {
    case ModelId::c1: return "c1";
    case ModelId::c2: return "c2";
    case ModelId::c3: return "c3";
    case ModelId::c4: return "c4";
    case ModelId::ml1: return "ml1";
    case ModelId::ml2: return "ml2";
    case ModelId::ml3: return "ml3";
  }
  return "?";
}

inline ModelId parse_model_id(const std::string& s) {
  if (s == "c1") return ModelId::c1;
  if (s == "c2") return ModelId::c2;
  if (s == "c3") return ModelId::c3;
  if (s == "c4") return ModelId::c4;
  if (s == "ml1") return ModelId::ml1;
  if (s == "ml2") return ModelId::ml2;
  if (s == "ml3") return ModelId::ml3;
  throw std::invalid_argument("unknown model id: " + s);
}

inline bool is_classical(ModelId m) {
  return m == ModelId::c1 || m == ModelId::c2 || m == ModelId::c3 || m == ModelId::c4;
}

}  // namespace onramp
