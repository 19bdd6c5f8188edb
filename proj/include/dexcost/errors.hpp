#pragma once

#include <stdexcept>
#include <string>

namespace dexcost {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error { public: using Error::Error; };
class InsufficientLiquidity : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class ModeError : public Error { public: using Error::Error; };
class MissingField : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class SingularDesign : public Error { public: using Error::Error; };
class SeparationError : public Error { public: using Error::Error; };

// Input data problems. The CLI maps these to exit code 1.
class ValidationError : public Error { public: using Error::Error; };
class SchemaError : public ValidationError { public: using ValidationError::ValidationError; };
class JoinError : public ValidationError { public: using ValidationError::ValidationError; };
// Recorded swap outcomes disagree with replaying the block.
class ReplayMismatch : public ValidationError { public: using ValidationError::ValidationError; };

}  // namespace dexcost
