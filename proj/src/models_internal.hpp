#pragma once

#include "rolling/models.hpp"

namespace rolling::models {

std::shared_ptr<const Geometry> make_hyperboloid_geometry();
std::shared_ptr<const Geometry> make_sphere_geometry();
std::shared_ptr<const Geometry> make_pseudo_orth_geometry(const PseudoOrthParams& params);
std::shared_ptr<const Geometry> make_stiefel_geometry(const StiefelShape& shape);

}  // namespace rolling::models
