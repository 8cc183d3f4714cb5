#pragma once

#include "koopcert/bounds.hpp"
#include "koopcert/control.hpp"
#include "koopcert/dictionary.hpp"
#include "koopcert/dynamics.hpp"
#include "koopcert/errors.hpp"
#include "koopcert/estimation.hpp"
#include "koopcert/ou_oracle.hpp"
#include "koopcert/rng.hpp"
