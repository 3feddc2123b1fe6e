import { fmt } from './lib';
const config = require('./config');

console.log(fmt(config.name));
