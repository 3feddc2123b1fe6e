module.exports = { name: 'toy' };
