# Generated by nnport 0.1.0: pt/subclassing -> tf/subclassing, pivot sha256 2cb77cacedfa626f568132aa40a7230abb40182bb8f3a8217cb3d99f4c0f4ba9
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

INPUT_SHAPE = (32, 32, 3)
DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


class AlexNet(keras.Model):
    def __init__(self):
        super().__init__()
        self.conv1 = layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool1 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv2 = layers.Conv2D(filters=192, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool2 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv3 = layers.Conv2D(filters=384, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv4 = layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv5 = layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool3 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.flatten = layers.Flatten()
        self.drop1 = layers.Dropout(rate=0.5)
        self.fc1 = layers.Dense(units=1024, activation="relu")
        self.drop2 = layers.Dropout(rate=0.5)
        self.fc2 = layers.Dense(units=512, activation="relu")
        self.drop3 = layers.Dropout(rate=0.5)
        self.fc3 = layers.Dense(units=10)

    def call(self, inputs):
        conv1 = self.conv1(inputs)
        pool1 = self.pool1(conv1)
        conv2 = self.conv2(pool1)
        pool2 = self.pool2(conv2)
        conv3 = self.conv3(pool2)
        conv4 = self.conv4(conv3)
        conv5 = self.conv5(conv4)
        pool3 = self.pool3(conv5)
        flatten = self.flatten(pool3)
        drop1 = self.drop1(flatten)
        fc1 = self.fc1(drop1)
        drop2 = self.drop2(fc1)
        fc2 = self.fc2(drop2)
        drop3 = self.drop3(fc2)
        fc3 = self.fc3(drop3)
        return fc3


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=0.001),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=True),
        metrics=["accuracy"],
    )
    model.fit(x, y, batch_size=32, epochs=10)
    return model.evaluate(x, y)
