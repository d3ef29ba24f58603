/// @file errors.h
/// @brief Exception hierarchy shared by every artqa module.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace artqa {

/// Base of all artqa errors. `code()` is a stable class name used in
/// server error bodies and CLI messages.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define ARTQA_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// Violated caller-side preconditions (bad arguments).
ARTQA_DEFINE_ERROR(PreconditionError);

// corpus
ARTQA_DEFINE_ERROR(FileNotFound);
ARTQA_DEFINE_ERROR(UnknownArtwork);

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string locus)
      : Error("ParseError", locus.empty() ? message : locus + ": " + message),
        locus_(std::move(locus)) {}

  /// "line L, column C" or a JSON pointer such as "/records/2/title".
  const std::string& locus() const noexcept { return locus_; }

 private:
  std::string locus_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error("ValidationError", join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

// textgen
ARTQA_DEFINE_ERROR(MissingQuestion);
ARTQA_DEFINE_ERROR(UnexpectedQuestion);
ARTQA_DEFINE_ERROR(EmptyGeneration);
ARTQA_DEFINE_ERROR(UnknownModel);
ARTQA_DEFINE_ERROR(CacheCorrupt);

class BackendUnavailable : public Error {
 public:
  BackendUnavailable(const std::string& message, int attempts = 1,
                     std::optional<int> http_status = std::nullopt,
                     std::optional<double> retry_after_s = std::nullopt)
      : Error("BackendUnavailable", message),
        attempts_(attempts),
        http_status_(http_status),
        retry_after_s_(retry_after_s) {}

  int attempts() const noexcept { return attempts_; }
  std::optional<int> http_status() const noexcept { return http_status_; }
  std::optional<double> retry_after_s() const noexcept { return retry_after_s_; }

 private:
  int attempts_;
  std::optional<int> http_status_;
  std::optional<double> retry_after_s_;
};

class BackendRefused : public Error {
 public:
  BackendRefused(const std::string& message, int http_status)
      : Error("BackendRefused", message), http_status_(http_status) {}

  int http_status() const noexcept { return http_status_; }

 private:
  int http_status_;
};

// qa
ARTQA_DEFINE_ERROR(EmptyContext);
ARTQA_DEFINE_ERROR(RemoteQaUnavailable);
ARTQA_DEFINE_ERROR(SpanOutOfBounds);

// metrics
ARTQA_DEFINE_ERROR(BadN);
ARTQA_DEFINE_ERROR(NoReferences);
ARTQA_DEFINE_ERROR(EmptyCorpus);
ARTQA_DEFINE_ERROR(MissingIdf);
ARTQA_DEFINE_ERROR(LengthMismatch);
ARTQA_DEFINE_ERROR(EmptyBatch);

// experiment
ARTQA_DEFINE_ERROR(RunFailed);
ARTQA_DEFINE_ERROR(EmptyReport);
ARTQA_DEFINE_ERROR(IoError);

#undef ARTQA_DEFINE_ERROR

}  // namespace artqa
