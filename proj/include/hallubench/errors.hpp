/// @file errors.hpp
/// @brief Exception hierarchy shared by every hallubench module.
#pragma once

#include <stdexcept>
#include <string>

namespace hallubench {

/// Root of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (JSON rows, category tokens, config files).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Any failure reported by, or while talking to, a model provider.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Network-level or server-side failure that is worth retrying.
class TransientError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Retries exhausted on a transient failure.
class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class AuthError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class EmptyReplyError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// A numeric reply outside its legal range (e.g. NLI probability > 1).
class RangeError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Embedding width changed between calls on one provider.
class DimensionError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Generator reply lacked a category token or answer text.
class GenerationParseError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Judge reply was not A or B, even after one re-ask.
class JudgeParseError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

} // namespace hallubench
