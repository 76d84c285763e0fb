#pragma once

#include <stdexcept>
#include <string>

namespace lanekit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TooFewPoints : public Error { public: using Error::Error; };
class DuplicatePoint : public Error { public: using Error::Error; };
class EmptySamples : public Error { public: using Error::Error; };
class InvalidMu : public Error { public: using Error::Error; };
class InvalidScale : public Error { public: using Error::Error; };
class EmptyFrame : public Error { public: using Error::Error; };
class InvalidSpec : public Error { public: using Error::Error; };
class InvalidStyle : public Error { public: using Error::Error; };
class NonInvertibleHomography : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };

/// Bad scenario/config content. CLI maps this to exit code 2.
class ConfigError : public Error { public: using Error::Error; };

/// Filesystem problems (missing files, unwritable outputs). CLI exit code 3.
class IoError : public Error { public: using Error::Error; };

}  // namespace lanekit
