#pragma once

namespace jigsaw {

// Reads JIGSAW_LOG (trace, debug, info, warn, error, off; default info) and
// configures the process-wide logger, which writes to stderr.
void init_logging();

}  // namespace jigsaw
