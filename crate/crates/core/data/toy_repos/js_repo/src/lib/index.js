export function fmt(name) {
  return `[${name}]`;
}
