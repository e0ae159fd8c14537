#include <catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"

using namespace hopic;

TEST_CASE("grid header parsing") {
  const auto h = io::parse_grid_header("# field D=2 n_cells=8x16 dx=0.25x0.125 components=2");
  CHECK(h.dims == 2);
  CHECK(h.n_cells == std::vector<int>{8, 16});
  CHECK(h.dx == std::vector<double>{0.25, 0.125});
  CHECK(h.components == 2);
  CHECK_THROWS(io::parse_grid_header("# nonsense"));
  CHECK_THROWS(io::parse_grid_header("# field D=2 n_cells=8 dx=0.25 components=1"));
}

TEST_CASE("grid dumps reject mismatched dimensions and truncation") {
  const ScalarField<1> f(Mesh<1>::uniform(4, 1.0), 1.0);
  std::stringstream ss;
  io::write_field(ss, f);
  std::stringstream copy(ss.str());
  CHECK_THROWS(io::read_grid<2>(copy));
  const auto text = ss.str();
  std::stringstream cut(text.substr(0, text.size() - 4));
  CHECK_THROWS(io::read_grid<1>(cut));
}

TEST_CASE("phase-space image dump") {
  PhaseSpaceImage img;
  img.n_x = 2;
  img.n_v = 2;
  img.length = 1.0;
  img.v_max = 1.0;
  img.values = {1, 2, 3, 4};
  std::stringstream ss;
  io::write_phase_space_image(ss, img);
  std::string header, a, b;
  std::getline(ss, header);
  std::getline(ss, a);
  std::getline(ss, b);
  CHECK(header.rfind("# phase_space_image n_x=2 n_v=2", 0) == 0);
  CHECK(a == "1,2");
  CHECK(b == "3,4");
}
