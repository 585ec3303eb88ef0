#include "twoscale/quadrature.hpp"

#include "twoscale/errors.hpp"

#include <string>
#include <vector>

namespace twoscale {

namespace {

void add_orbit3(std::vector<TriangleQuadPoint>& rule, double w, double a) {
  const double b = 1.0 - 2.0 * a;
  rule.push_back({{a, a, b}, w});
  rule.push_back({{a, b, a}, w});
  rule.push_back({{b, a, a}, w});
}

void add_orbit6(std::vector<TriangleQuadPoint>& rule, double w, double a, double b) {
  const double c = 1.0 - a - b;
  rule.push_back({{a, b, c}, w});
  rule.push_back({{a, c, b}, w});
  rule.push_back({{b, a, c}, w});
  rule.push_back({{b, c, a}, w});
  rule.push_back({{c, a, b}, w});
  rule.push_back({{c, b, a}, w});
}

// Dunavant rules.
const std::vector<TriangleQuadPoint>& degree2() {
  static const std::vector<TriangleQuadPoint> rule = [] {
    std::vector<TriangleQuadPoint> r;
    add_orbit3(r, 1.0 / 3.0, 1.0 / 6.0);
    return r;
  }();
  return rule;
}

const std::vector<TriangleQuadPoint>& degree4() {
  static const std::vector<TriangleQuadPoint> rule = [] {
    std::vector<TriangleQuadPoint> r;
    add_orbit3(r, 0.223381589678011465944827, 0.445948490915964886318329);
    add_orbit3(r, 0.109951743655321867388506, 0.091576213509770743459571);
    return r;
  }();
  return rule;
}

const std::vector<TriangleQuadPoint>& degree6() {
  static const std::vector<TriangleQuadPoint> rule = [] {
    std::vector<TriangleQuadPoint> r;
    add_orbit3(r, 0.116786275726379366030690, 0.249286745170910421291638);
    add_orbit3(r, 0.050844906370206816920937, 0.063089014491502228340332);
    add_orbit6(r, 0.082851075618373575193554, 0.053145049844816947353249,
               0.310352451033784405416607);
    return r;
  }();
  return rule;
}

const std::vector<std::vector<LineQuadPoint>>& gauss_lines() {
  static const std::vector<std::vector<LineQuadPoint>> rules = {
      {{0.5, 1.0}},
      {{0.21132486540518711775, 0.5}, {0.78867513459481288225, 0.5}},
      {{0.11270166537925831148, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.88729833462074168852, 5.0 / 18.0}},
      {{0.06943184420297371239, 0.17392742256872692869},
       {0.33000947820757186760, 0.32607257743127307131},
       {0.66999052179242813240, 0.32607257743127307131},
       {0.93056815579702628761, 0.17392742256872692869}},
      {{0.04691007703066800360, 0.11846344252809454376},
       {0.23076534494715845448, 0.23931433524968323402},
       {0.5, 0.28444444444444444444},
       {0.76923465505284154552, 0.23931433524968323402},
       {0.95308992296933199640, 0.11846344252809454376}},
  };
  return rules;
}

}  // namespace

std::span<const TriangleQuadPoint> triangle_rule(int degree) {
  switch (degree) {
    case 2:
      return degree2();
    case 4:
      return degree4();
    case 6:
      return degree6();
    default:
      throw PreconditionError("no triangle rule of degree " + std::to_string(degree));
  }
}

std::span<const LineQuadPoint> line_rule(int points) {
  if (points < 1 || points > 5) {
    throw PreconditionError("no Gauss rule with " + std::to_string(points) + " points");
  }
  return gauss_lines()[points - 1];
}

}  // namespace twoscale
