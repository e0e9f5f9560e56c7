#pragma once

#include <stdexcept>
#include <string>

namespace docforensics {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define DOCFORENSICS_ERROR(Name) \
  struct Name : Error {          \
    using Error::Error;          \
  }

DOCFORENSICS_ERROR(MalformedJpeg);
DOCFORENSICS_ERROR(EncodeFailure);
DOCFORENSICS_ERROR(NoEdges);
DOCFORENSICS_ERROR(OutOfBounds);
DOCFORENSICS_ERROR(InvalidArgument);
DOCFORENSICS_ERROR(ProviderUnavailable);
DOCFORENSICS_ERROR(EmptyImage);
DOCFORENSICS_ERROR(DegenerateRegion);
DOCFORENSICS_ERROR(ShapeMismatch);
DOCFORENSICS_ERROR(ConfigMismatch);
DOCFORENSICS_ERROR(EmptyCorpus);
DOCFORENSICS_ERROR(RejectedInput);
DOCFORENSICS_ERROR(ModelLoadError);
DOCFORENSICS_ERROR(EmptyInput);
DOCFORENSICS_ERROR(IoError);
DOCFORENSICS_ERROR(ConfigError);

#undef DOCFORENSICS_ERROR

}  // namespace docforensics
