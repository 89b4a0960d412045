#pragma once

#include "gicdlc/binarize.hpp"
#include "gicdlc/bytes.hpp"
#include "gicdlc/codec.hpp"
#include "gicdlc/errors.hpp"
#include "gicdlc/eval.hpp"
#include "gicdlc/fixtures.hpp"
#include "gicdlc/image.hpp"
#include "gicdlc/lutnet.hpp"
#include "gicdlc/prob.hpp"
#include "gicdlc/pyramid.hpp"
#include "gicdlc/rans.hpp"
