#pragma once

#include "funnystrom/bounds.hpp"
#include "funnystrom/lanczos.hpp"
#include "funnystrom/linalg.hpp"
#include "funnystrom/matvec.hpp"
#include "funnystrom/nystrom.hpp"
#include "funnystrom/rng.hpp"
#include "funnystrom/scalar_function.hpp"
#include "funnystrom/testmat.hpp"
#include "funnystrom/trace.hpp"
#include "funnystrom/types.hpp"
