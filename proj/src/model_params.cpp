#include "fbsq/model_params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbsq {

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("model.") + name + " must be positive and finite");
    }
  };
  positive(nu, "nu");
  positive(eta, "eta");
  positive(lambda, "lambda");
  if (!std::isfinite(g)) throw std::invalid_argument("model.g must be finite");
  if (!std::isfinite(omega)) throw std::invalid_argument("model.omega must be finite");
}

}  // namespace fbsq
