#include "neckpinch/surface_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>

#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

bool Frame::is_valid(double tol) const {
    const Eigen::Matrix3d g = axes.transpose() * axes - Eigen::Matrix3d::Identity();
    return g.cwiseAbs().maxCoeff() <= tol && std::abs(axes.determinant() - 1.0) <= tol;
}

RigidMotion RigidMotion::translation(const Eigen::Vector3d& t) {
    RigidMotion m;
    m.phi = t;
    return m;
}

RigidMotion RigidMotion::rotation(const Eigen::Vector3d& axis, double angle) {
    RigidMotion m;
    m.psi = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    return m;
}

RigidMotion RigidMotion::from_params(double axial, double shift1, double shift2, double tilt1,
                                     double tilt2) {
    RigidMotion m;
    m.phi = Eigen::Vector3d(axial, shift1, shift2);
    const Eigen::Vector3d w(0.0, -tilt2, tilt1);
    const double ang = w.norm();
    if (ang > 0.0) m.psi = Eigen::AngleAxisd(ang, w / ang).toRotationMatrix();
    return m;
}

bool RigidMotion::is_identity() const {
    return phi.isZero(0.0) && psi == Eigen::Matrix3d::Identity();
}

double RigidMotion::rotation_size() const {
    const double c = std::clamp((psi.trace() - 1.0) / 2.0, -1.0, 1.0);
    return 2.0 * std::sin(std::acos(c) / 2.0);
}

RigidMotion compose(const RigidMotion& m1, const RigidMotion& m2) {
    RigidMotion m;
    m.phi = m1.phi + m1.psi * m2.phi;
    m.psi = m1.psi * m2.psi;
    return m;
}

RigidMotion inverse(const RigidMotion& m) {
    RigidMotion r;
    r.psi = m.psi.transpose();
    r.phi = -(r.psi * m.phi);
    return r;
}

Frame moved(const Frame& f, const RigidMotion& m) {
    Frame r;
    r.origin = f.origin + f.axes * m.phi;
    r.axes = f.axes * m.psi;
    return r;
}

Eigen::Vector4d quaternion_of(const Eigen::Matrix3d& rot) {
    Eigen::Quaterniond q(rot);
    q.normalize();
    if (q.w() < 0) q.coeffs() *= -1.0;
    return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
}

namespace {

// Cubic Lagrange weights for nodes at offsets -1, 0, 1, 2 and fractional position t.
void cubic_weights(double t, double w[4]) {
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

}  // namespace

double interpolate(const GraphField& g, double y, double theta) {
    const double h = g.dy();
    double s = (std::clamp(y, -g.y_max, g.y_max) + g.y_max) / h;
    int i0 = static_cast<int>(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0, g.ny - 4);
    const double ty = s - (i0 + 1);

    const double ht = g.dth();
    double u = theta / ht;
    const double fl = std::floor(u);
    const double tt = u - fl;
    const int j1 = static_cast<int>(fl);

    double wy[4], wt[4];
    cubic_weights(ty, wy);
    cubic_weights(tt, wt);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double row = 0.0;
        for (int b = 0; b < 4; ++b) {
            int j = (j1 - 1 + b) % g.nth;
            if (j < 0) j += g.nth;
            row += wt[b] * g(i0 + a, j);
        }
        acc += wy[a] * row;
    }
    return acc;
}

namespace {

struct OldSurface {
    const GraphField& g;
    const std::optional<FormalProfile>& far;

    double radius(double y, double theta) const {
        if (y > g.y_max || y < -g.y_max) {
            const double edge = y > 0 ? g.y_max : -g.y_max;
            const double base = interpolate(g, edge, theta);
            if (!far) return base;
            return base + far->value(y) - far->value(edge);
        }
        return interpolate(g, y, theta);
    }
};

}  // namespace

GraphField resample_graph(const GraphField& g, const RigidMotion& m, const ResampleOptions& opt) {
    if (m.is_identity() && opt.scale == 1.0) return g;
    if (m.rotation_size() > opt.max_rotation)
        fail(ErrorKind::MotionTooLarge, "rotation exceeds the admissible frame change");
    if (m.phi.norm() > opt.max_translation)
        fail(ErrorKind::MotionTooLarge, "translation exceeds the admissible frame change");
    if (!(opt.scale > 0.0)) fail(ErrorKind::InvalidArgument, "scale must be positive");

    const OldSurface surf{g, opt.far_field};
    GraphField out = g.like();
    const double s = opt.scale;
    for (int i = 0; i < g.ny; ++i) {
        const double yp = g.y(i);
        for (int j = 0; j < g.nth; ++j) {
            const double th = g.theta(j);
            const Eigen::Vector3d base = m.phi + s * m.psi.col(0) * yp;
            const Eigen::Vector3d dir = s * (m.psi.col(1) * std::cos(th) + m.psi.col(2) * std::sin(th));
            auto F = [&](double r) {
                const Eigen::Vector3d q = base + r * dir;
                const double rho = std::hypot(q[1], q[2]);
                double ang = std::atan2(q[2], q[1]);
                if (ang < 0) ang += 2.0 * kPi;
                return rho - surf.radius(q[0], ang);
            };
            // Bracket around the untilted radius.
            const double guess = std::max(surf.radius(base[0], th) / s, 1e-12);
            double lo = 0.5 * guess, hi = 1.5 * guess;
            double flo = F(lo), fhi = F(hi);
            for (int k = 0; k < 20 && flo > 0.0; ++k) {
                lo *= 0.5;
                flo = F(lo);
            }
            for (int k = 0; k < 20 && fhi < 0.0; ++k) {
                hi *= 2.0;
                fhi = F(hi);
            }
            if (!(flo <= 0.0 && fhi >= 0.0))
                fail(ErrorKind::GraphConditionViolated,
                     "ray at y=" + fmt_double(yp) + " theta=" + fmt_double(th) +
                         " does not cross the surface");
            double r = std::clamp(guess, lo, hi);
            bool done = false;
            for (int it = 0; it < opt.max_iterations; ++it) {
                const double fr = F(r);
                if (fr == 0.0) {
                    done = true;
                    break;
                }
                if (fr < 0.0) lo = r; else hi = r;
                const double hstep = 1e-6 * std::max(1.0, r);
                const double dfr = (F(r + hstep) - F(r - hstep)) / (2.0 * hstep);
                double next = (dfr > 0.0) ? r - fr / dfr : 0.5 * (lo + hi);
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                const double step = std::abs(next - r);
                r = next;
                if (step <= opt.tolerance * std::max(1.0, r) || hi - lo <= opt.tolerance) {
                    done = true;
                    break;
                }
            }
            if (!done)
                fail(ErrorKind::GraphConditionViolated,
                     "root finding did not converge at y=" + fmt_double(yp));
            if (!(r > 0.0)) fail(ErrorKind::GraphConditionViolated, "nonpositive radius after resampling");
            out(i, j) = r;
        }
    }
    return out;
}

double tilted_cylinder_graph(double R, double eps, double x, double theta) {
    const double se = std::sin(eps), ce = std::cos(eps), st = std::sin(theta);
    const double A = 1.0 - st * st * se * se;
    const double B = -2.0 * x * ce * se * st;
    const double C = x * x * se * se - R * R;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0 || A <= 0.0) fail(ErrorKind::NotAGraph, "tilted cylinder is not a graph on this ray");
    return (-B + std::sqrt(disc)) / (2.0 * A);
}

namespace {

// Records are little-endian on disk and written by plain byte copies.
static_assert(std::endian::native == std::endian::little, "graph records assume a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v;
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    if (!is) fail(ErrorKind::Io, "truncated graph record");
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_graph_binary(const GraphField& g, std::ostream& os) {
    os.write(kGraphMagic, 4);
    put<std::uint32_t>(os, kGraphVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.ny));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nth));
    put<double>(os, g.y_max);
    for (double v : g.values) put<double>(os, v);
}

GraphField read_graph_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kGraphMagic, 4) != 0) fail(ErrorKind::Io, "not a graph record");
    const auto version = get<std::uint32_t>(is);
    if (version != kGraphVersion) fail(ErrorKind::Io, "unsupported graph record version");
    const auto ny = get<std::uint32_t>(is);
    const auto nth = get<std::uint32_t>(is);
    const double y_max = get<double>(is);
    if (ny < 5 || nth < 2 || ny > (1u << 20) || nth > (1u << 16))
        fail(ErrorKind::Io, "implausible grid size in graph record");
    GraphField g(y_max, static_cast<int>(ny), static_cast<int>(nth));
    for (double& v : g.values) v = get<double>(is);
    return g;
}

void write_graph_binary_file(const GraphField& g, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorKind::Io, "cannot open " + path);
    write_graph_binary(g, os);
}

GraphField read_graph_binary_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorKind::Io, "cannot open " + path);
    return read_graph_binary(is);
}

void write_graph_csv(const GraphField& g, std::ostream& os) {
    os << "y,theta,value\n";
    for (int i = 0; i < g.ny; ++i)
        for (int j = 0; j < g.nth; ++j)
            os << fmt_double(g.y(i)) << ',' << fmt_double(g.theta(j)) << ',' << fmt_double(g(i, j))
               << '\n';
}

}  // namespace neck
