#pragma once

#include <stdexcept>
#include <string>

namespace geodecomp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- order / poset construction ---
struct CycleDetected : Error { using Error::Error; };
struct UnknownIdentifier : Error { using Error::Error; };
struct DuplicateIdentifier : Error { using Error::Error; };
struct NotLowerSet : Error { using Error::Error; };
struct NotMaximal : Error { using Error::Error; };
struct NoTopElement : Error { using Error::Error; };

// --- linear algebra ---
struct DimensionMismatch : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

// --- function spaces / extension operators ---
struct ShapeMismatch : Error { using Error::Error; };
struct MissingTrace : Error { using Error::Error; };
struct NotLocalOperator : Error { using Error::Error; };
struct NotCompatible : Error { using Error::Error; };
struct InvalidFamily : Error { using Error::Error; };

// --- decomposition ---
struct DecompositionFailure : Error { using Error::Error; };
struct MissingDecomposition : Error { using Error::Error; };
struct InvalidDagger : Error { using Error::Error; };

// --- simplicial backend ---
struct DuplicateVertexInCell : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct MissingExtension : Error { using Error::Error; };
struct NoSuitableFacePair : Error { using Error::Error; };

// --- input handling ---
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

} // namespace geodecomp
