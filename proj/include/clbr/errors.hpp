#pragma once

#include <stdexcept>
#include <string>

namespace clbr {

// Error categories map 1:1 onto CLI exit codes (see tools/clbr_main.cpp).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct MissingArtifactError : Error {
    using Error::Error;
};

}  // namespace clbr
