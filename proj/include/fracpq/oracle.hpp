#pragma once

#include "fracpq/forms.hpp"
#include "fracpq/grid.hpp"

namespace fracpq::oracle {

// Direct evaluation of the discrete Gagliardo forms from the grid nodes: the
// pair weights are recomputed inside the double loop and the exterior tail
// is integrated separately on each half line. Shares nothing with
// build_kernel beyond the grid.

double seminorm_pow(const Field& u, const Grid& grid, double s, double r);
double bilinear_form(const Field& u, const Field& v, const Grid& grid, double s, double r);

}  // namespace fracpq::oracle
