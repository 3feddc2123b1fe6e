#ifndef CALC_H
#define CALC_H

int twice(int x);

#endif
