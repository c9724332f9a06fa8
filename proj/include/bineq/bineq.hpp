#pragma once

#include "binned.hpp"
#include "binned_mle.hpp"
#include "distributions.hpp"
#include "eval.hpp"
#include "inequality.hpp"
#include "mgbe.hpp"
#include "rpme.hpp"
