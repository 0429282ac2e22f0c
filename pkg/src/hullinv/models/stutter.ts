system stutter {
  state x: int;
  init: x = 0;
  trans: x' = x;
  property: x <= 0;
}
