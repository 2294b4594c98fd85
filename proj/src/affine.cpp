#include "affdim/affine.hpp"

namespace affdim {

template struct AffineMap<double>;
template class ProjectivePoint<double>;
template struct Svd2<double>;

template Svd2<double> svd2(const Matrix2d&);
template ProjectivePointd major_direction(const Matrix2d&);
template double rp1_distance(const ProjectivePointd&, const ProjectivePointd&);
template AffineMap2d compose(const AffineMap2d&, const AffineMap2d&);
template AffineMap2d invert(const AffineMap2d&);
template double norm_distance(const AffineMap2d&, const AffineMap2d&);
template double invariant_distance(const AffineMap2d&, const AffineMap2d&);

}  // namespace affdim
