#pragma once

#include <stdexcept>
#include <string>

namespace collodiff {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonManifoldEdge : Error {
    int v0, v1, face_count;
    NonManifoldEdge(int v0_, int v1_, int count)
        : Error("non-manifold edge (" + std::to_string(v0_) + "," + std::to_string(v1_) +
                ") with " + std::to_string(count) + " incident faces"),
          v0(v0_), v1(v1_), face_count(count) {}
};

struct EmptyMesh : Error {
    EmptyMesh() : Error("mesh has no triangles") {}
};

struct SizeMismatch : Error {
    using Error::Error;
};

struct NonFiniteGradient : Error {
    using Error::Error;
};

struct InputSelfIntersecting : Error {
    InputSelfIntersecting() : Error("input mesh self-intersects") {}
};

struct RemeshFailed : Error {
    using Error::Error;
};

struct ProjectionTooFar : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace collodiff
