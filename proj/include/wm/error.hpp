#pragma once

#include <stdexcept>
#include <string>

namespace wm {

// Base for every error the pipeline raises on purpose. Anything else escaping
// a stage is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WM_DECLARE_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// ingest
WM_DECLARE_ERROR(RepositoryUnreadable);
WM_DECLARE_ERROR(EmptyHistory);
WM_DECLARE_ERROR(ManifestMalformed);

// secfilter
WM_DECLARE_ERROR(ClassifierUnavailable);
WM_DECLARE_ERROR(LexiconInvalid);

// cwe
WM_DECLARE_ERROR(CatalogMalformed);
WM_DECLARE_ERROR(UnknownCweId);

// semvec
WM_DECLARE_ERROR(UnknownCategory);
WM_DECLARE_ERROR(DimensionMismatch);
WM_DECLARE_ERROR(ExchangeMalformed);
WM_DECLARE_ERROR(UnknownTextId);

// szz
WM_DECLARE_ERROR(AttributionFailed);

// weakness
WM_DECLARE_ERROR(UnknownAuthor);

// analytics
WM_DECLARE_ERROR(PopulationTooSmall);
WM_DECLARE_ERROR(LengthMismatch);
WM_DECLARE_ERROR(InvalidArgument);

// pipeline
WM_DECLARE_ERROR(ConfigInvalid);
WM_DECLARE_ERROR(ArtifactMalformed);

#undef WM_DECLARE_ERROR

class StageFailed : public Error {
 public:
  StageFailed(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace wm
