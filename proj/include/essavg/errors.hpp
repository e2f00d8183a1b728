#pragma once

#include <stdexcept>
#include <string>

namespace essavg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geom
struct AsymmetryError : Error { using Error::Error; };
struct SingularInputError : Error { using Error::Error; };
struct CoincidentCentersError : Error { using Error::Error; };
struct DegenerateEssentialError : Error { using Error::Error; };
struct InconsistentPairError : Error { using Error::Error; };
struct CollinearDegenerateError : Error { using Error::Error; };

// nview
struct IncompleteMatrixError : Error { using Error::Error; };
struct EigenvalueMultiplicityError : Error { using Error::Error; };
struct PairingError : Error { using Error::Error; };
struct NoValidSignError : Error { using Error::Error; };

// cover
struct ZeroTranslationError : Error { using Error::Error; };
struct DisconnectedGraphError : Error { using Error::Error; };
struct EmptyCoverError : Error { using Error::Error; };

// register
struct ConfigurationMismatchError : Error { using Error::Error; };
struct InsufficientOverlapError : Error { using Error::Error; };

// synthbench
struct LayoutDegenerateError : Error { using Error::Error; };

// io
struct IoError : Error { using Error::Error; };
struct InvalidInputError : Error { using Error::Error; };

}  // namespace essavg
