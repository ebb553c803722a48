#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "neckpinch/core_profile.hpp"
#include "neckpinch/field.hpp"

namespace neck {

// Columns of `axes` are the axis direction x0 and the transverse directions x1, x2.
struct Frame {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();

    bool is_valid(double tol = 1e-12) const;
};

// A point with coordinates p' in the new frame has coordinates phi + psi p' in the
// old frame.
struct RigidMotion {
    Eigen::Vector3d phi = Eigen::Vector3d::Zero();
    Eigen::Matrix3d psi = Eigen::Matrix3d::Identity();

    static RigidMotion identity() { return {}; }
    static RigidMotion translation(const Eigen::Vector3d& t);
    static RigidMotion rotation(const Eigen::Vector3d& axis, double angle);
    // Small-parameter chart used by the optimal refit: axial shift, two transverse
    // shifts, and tilts of the axis towards x1 and x2.
    static RigidMotion from_params(double axial, double shift1, double shift2, double tilt1,
                                   double tilt2);

    bool is_identity() const;
    double rotation_size() const;  // spectral norm of psi - I
};

RigidMotion compose(const RigidMotion& m1, const RigidMotion& m2);
RigidMotion inverse(const RigidMotion& m);
Frame moved(const Frame& f, const RigidMotion& m);

Eigen::Vector4d quaternion_of(const Eigen::Matrix3d& rot);  // (w, x, y, z)

struct ResampleOptions {
    // New length unit measured in old units (rescaling of the blow-up variables).
    double scale = 1.0;
    double max_rotation = 0.2;
    double max_translation = 2.0;
    // Outside the sampled strip the graph is continued by this profile's increments.
    std::optional<FormalProfile> far_field;
    int max_iterations = 50;
    double tolerance = 1e-13;
};

// Re-expresses the graph r = g(y, theta) in the frame reached by `m`. The rays of the
// new frame are intersected with the old surface by safeguarded Newton iteration.
GraphField resample_graph(const GraphField& g, const RigidMotion& m,
                          const ResampleOptions& opt = {});

// Local bicubic (4x4 Lagrange) interpolation with periodic theta; y outside the
// grid is clamped to the boundary row.
double interpolate(const GraphField& g, double y, double theta);

// Radius of the cylinder of radius R whose axis is rotated by eps in the (x0, x2)
// plane, along the ray (x, theta).
double tilted_cylinder_graph(double R, double eps, double x, double theta);

void write_graph_binary(const GraphField& g, std::ostream& os);
GraphField read_graph_binary(std::istream& is);
void write_graph_binary_file(const GraphField& g, const std::string& path);
GraphField read_graph_binary_file(const std::string& path);
void write_graph_csv(const GraphField& g, std::ostream& os);

inline constexpr char kGraphMagic[4] = {'N', 'P', 'G', 'F'};
inline constexpr unsigned kGraphVersion = 1;

}  // namespace neck
