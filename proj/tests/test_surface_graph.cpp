#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "neckpinch/errors.hpp"
#include "neckpinch/surface_graph.hpp"

using namespace neck;

namespace {

double max_diff(const GraphField& a, const GraphField& b, double y_lim = 1e300) {
    double m = 0.0;
    for (int i = 0; i < a.ny; ++i) {
        if (std::abs(a.y(i)) > y_lim) continue;
        for (int j = 0; j < a.nth; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    }
    return m;
}

// Independent oracle for the tilted cylinder: bisection on the distance to the tilted axis.
double tilted_oracle(double R, double eps, double x, double th) {
    const Eigen::Vector3d d(std::cos(eps), 0.0, std::sin(eps));
    auto f = [&](double r) {
        const Eigen::Vector3d p(x, r * std::cos(th), r * std::sin(th));
        return (p - p.dot(d) * d).norm() - R;
    };
    double lo = 0.0, hi = 10.0 * R + std::abs(x);
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

GraphField smooth_neck(int ny, int nth) {
    return GraphField::from_function(16.0, ny, nth, [](double y, double th) {
        return std::sqrt((2.0 + 0.1 * y * y) / 1.0) + 0.02 * y * std::cos(th) * std::exp(-y * y / 8.0) +
               0.01 * std::sin(2.0 * th) * std::exp(-y * y / 6.0);
    });
}

}  // namespace

TEST_CASE("rigid motion algebra") {
    const RigidMotion m = compose(RigidMotion::translation({0.1, -0.2, 0.05}),
                                  RigidMotion::rotation({0.3, 1.0, -0.4}, 0.07));
    const RigidMotion mi = compose(m, RigidMotion::identity());
    CHECK((mi.phi - m.phi).norm() == 0.0);
    CHECK((mi.psi - m.psi).norm() == 0.0);

    const RigidMotion e = compose(m, inverse(m));
    CHECK(e.phi.norm() < 1e-12);
    CHECK((e.psi - Eigen::Matrix3d::Identity()).norm() < 1e-12);

    const Eigen::Vector3d ax(0.2, 0.5, 1.0);
    const RigidMotion r12 = compose(RigidMotion::rotation(ax, 0.03), RigidMotion::rotation(ax, 0.05));
    CHECK((r12.psi - RigidMotion::rotation(ax, 0.08).psi).norm() < 1e-14);

    // associativity
    const RigidMotion a = RigidMotion::from_params(0.1, 0.0, 0.02, 0.01, -0.03);
    const RigidMotion b = RigidMotion::from_params(-0.05, 0.04, 0.0, 0.02, 0.0);
    const RigidMotion l = compose(compose(a, b), m), r = compose(a, compose(b, m));
    CHECK((l.phi - r.phi).norm() < 1e-15);
    CHECK((l.psi - r.psi).norm() < 1e-15);
}

TEST_CASE("frames stay orthonormal under motions") {
    Frame f;
    CHECK(f.is_valid());
    for (int k = 0; k < 20; ++k) f = moved(f, RigidMotion::from_params(0.01, 0.02, -0.01, 0.03, 0.02));
    CHECK(f.is_valid());
    const Eigen::Vector4d q = quaternion_of(f.axes);
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q[0] >= 0.0);
}

TEST_CASE("tilted cylinder graph examples") {
    for (double x : {-3.0, 0.0, 2.5})
        for (double th : {0.0, 1.0, 4.0}) CHECK(tilted_cylinder_graph(1.0, 0.0, x, th) == doctest::Approx(1.0));
    // at x = 0 along theta = pi/2 the ray is in the tilt plane: r = R / cos(eps) = 1 + O(eps^2)
    const double eps = 0.02;
    const double r = tilted_cylinder_graph(1.0, eps, 0.0, kPi / 2.0);
    CHECK(r == doctest::Approx(1.0 / std::cos(eps)).epsilon(1e-14));
    CHECK(std::abs(r - 1.0) < eps * eps);
    CHECK(tilted_cylinder_graph(2.0, 0.05, 1.0, 0.0) == doctest::Approx(tilted_oracle(2.0, 0.05, 1.0, 0.0)).epsilon(1e-13));
    CHECK(tilted_cylinder_graph(2.0, 0.05, 1.0, 1.2) == doctest::Approx(tilted_oracle(2.0, 0.05, 1.0, 1.2)).epsilon(1e-13));
    CHECK_THROWS_AS(tilted_cylinder_graph(1.0, kPi / 2.0, 0.0, kPi / 2.0), Error);
}

TEST_CASE("resample: identity and axial translation") {
    const GraphField g = smooth_neck(161, 16);
    const GraphField same = resample_graph(g, RigidMotion::identity());
    CHECK(same.values == g.values);

    const GraphField cyl(16.0, 161, 16, 1.7);
    const GraphField moved_cyl = resample_graph(cyl, RigidMotion::translation({0.37, 0.0, 0.0}));
    CHECK(max_diff(moved_cyl, cyl) < 1e-12);
}

TEST_CASE("resample: tilted cylinder oracle") {
    const double R = 1.5;
    const GraphField cyl(16.0, 161, 16, R);
    for (double eps : {0.01, 0.02, 0.05}) {
        const GraphField out = resample_graph(cyl, RigidMotion::rotation({0.0, 1.0, 0.0}, eps));
        double err = 0.0;
        for (int i = 0; i < out.ny; ++i)
            for (int j = 0; j < out.nth; ++j)
                err = std::max(err, std::abs(out(i, j) - tilted_cylinder_graph(R, eps, out.y(i), out.theta(j))));
        CHECK(err < 1e-11);
    }
}

TEST_CASE("resample: forward then inverse converges with the grid") {
    const RigidMotion m = RigidMotion::from_params(0.05, 0.01, -0.02, 0.01, 0.015);
    ResampleOptions opt;
    opt.far_field = FormalProfile(0.5, 0.1);
    double err[2];
    int k = 0;
    for (int ny : {161, 321}) {
        const GraphField g = smooth_neck(ny, ny == 161 ? 16 : 32);
        const GraphField back = resample_graph(resample_graph(g, m, opt), inverse(m), opt);
        err[k++] = max_diff(back, g, 12.0);
    }
    CHECK(err[1] < 1e-4);
    // bicubic interpolation: at least third order under halving
    CHECK(err[0] / err[1] > 8.0);
}

TEST_CASE("resample rejects large motions") {
    const GraphField cyl(16.0, 81, 8, 1.0);
    try {
        resample_graph(cyl, RigidMotion::rotation({0.0, 1.0, 0.0}, 0.3));
        FAIL("expected MotionTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MotionTooLarge);
    }
    CHECK_THROWS_AS(resample_graph(cyl, RigidMotion::translation({3.0, 0.0, 0.0})), Error);
}

TEST_CASE("interpolation is exact on cubics and periodic in theta") {
    const GraphField g = GraphField::from_function(4.0, 41, 16, [](double y, double th) {
        return 1.0 + 0.1 * y * y * y - 0.3 * y + 0.2 * std::cos(th);
    });
    CHECK(interpolate(g, 0.37, 0.0) == doctest::Approx(1.0 + 0.1 * 0.37 * 0.37 * 0.37 - 0.3 * 0.37 + 0.2));
    const double on_node = 1.0 + 0.1 * 1.1 * 1.1 * 1.1 - 0.3 * 1.1 + 0.2 * std::cos(g.theta(3));
    CHECK(interpolate(g, 1.1, g.theta(3)) == doctest::Approx(on_node).epsilon(1e-14));
    CHECK(interpolate(g, 1.1, 2.0 * kPi + g.theta(3)) == doctest::Approx(on_node).epsilon(1e-12));
}

TEST_CASE("graph records round-trip and reject corruption") {
    const GraphField g = smooth_neck(41, 8);
    std::stringstream ss;
    write_graph_binary(g, ss);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 8 * g.size());
    CHECK(bytes.substr(0, 4) == "NPGF");
    std::stringstream in(bytes);
    const GraphField back = read_graph_binary(in);
    CHECK(back.same_grid(g));
    CHECK(back.values == g.values);

    std::stringstream bad("XXXX" + bytes.substr(4));
    CHECK_THROWS_AS(read_graph_binary(bad), Error);
    std::stringstream cut(bytes.substr(0, bytes.size() - 3));
    try {
        read_graph_binary(cut);
        FAIL("expected Io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }

    std::ostringstream csv;
    write_graph_csv(g, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("y,theta,value\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(g.size()) + 1);
}
