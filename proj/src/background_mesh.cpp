#include "immersed/background_mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace immersed {

BackgroundMesh::BackgroundMesh(Point origin, Point extent, int nx, int ny)
    : origin_(origin), extent_(extent), nx_(nx), ny_(ny) {
  if (nx <= 0 || ny <= 0) throw std::invalid_argument("cell counts must be positive");
  if (!(extent.x > 0.0 && extent.y > 0.0)) throw std::invalid_argument("box extent must be positive");
  h_ = extent.x / nx;
  double hy = extent.y / ny;
  if (std::abs(h_ - hy) > 1e-12 * h_) throw std::invalid_argument("cells must be square (h_x != h_y)");
}

Cell BackgroundMesh::cell(int e) const {
  auto [i, j] = element_ij(e);
  return {{origin_.x + i * h_, origin_.y + j * h_}, h_};
}

std::array<int, 4> BackgroundMesh::neighbors(int e) const {
  auto [i, j] = element_ij(e);
  return {i > 0 ? e - 1 : -1, i + 1 < nx_ ? e + 1 : -1, j > 0 ? e - nx_ : -1, j + 1 < ny_ ? e + nx_ : -1};
}

int BackgroundMesh::face_id(FaceOrientation o, int i, int j) const {
  if (o == FaceOrientation::Vertical) return j * (nx_ + 1) + i;
  return (nx_ + 1) * ny_ + j * nx_ + i;
}

Face BackgroundMesh::face(int id) const {
  Face f;
  int nv = (nx_ + 1) * ny_;
  if (id < nv) {
    f.orientation = FaceOrientation::Vertical;
    f.i = id % (nx_ + 1);
    f.j = id / (nx_ + 1);
    f.first = f.i > 0 ? element_id(f.i - 1, f.j) : -1;
    f.second = f.i < nx_ ? element_id(f.i, f.j) : -1;
  } else {
    id -= nv;
    f.orientation = FaceOrientation::Horizontal;
    f.i = id % nx_;
    f.j = id / nx_;
    f.first = f.j > 0 ? element_id(f.i, f.j - 1) : -1;
    f.second = f.j < ny_ ? element_id(f.i, f.j) : -1;
  }
  return f;
}

std::array<int, 4> BackgroundMesh::element_faces(int e) const {
  auto [i, j] = element_ij(e);
  return {face_id(FaceOrientation::Vertical, i, j), face_id(FaceOrientation::Vertical, i + 1, j),
          face_id(FaceOrientation::Horizontal, i, j), face_id(FaceOrientation::Horizontal, i, j + 1)};
}

bool BackgroundMesh::on_box_boundary(Point p, double tol) const {
  double x1 = origin_.x + extent_.x, y1 = origin_.y + extent_.y;
  return std::abs(p.x - origin_.x) <= tol || std::abs(p.x - x1) <= tol || std::abs(p.y - origin_.y) <= tol ||
         std::abs(p.y - y1) <= tol;
}

}  // namespace immersed
